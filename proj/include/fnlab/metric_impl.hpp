#pragma once

#include <Eigen/Cholesky>

#include "fnlab/error.hpp"

namespace fnlab {

template <class MetricFn>
std::vector<Mat> christoffel_by_differences(MetricFn&& g_of, const Vec& q, double h) {
  const int n = static_cast<int>(q.size());
  std::vector<Mat> dg(n);  // dg[l] = d_l g
  for (int l = 0; l < n; ++l) {
    Vec qp = q, qm = q;
    qp(l) += h;
    qm(l) -= h;
    dg[l] = (g_of(qp) - g_of(qm)) / (2 * h);
  }
  const Mat g = g_of(q);
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::MetricNotSpd, "metric is not positive definite");
  const Mat ginv = llt.solve(Mat::Identity(n, n));
  std::vector<Mat> gamma(n, Mat::Zero(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        gamma[k](i, j) = gamma[k](j, i) = 0.5 * s;
      }
  return gamma;
}

}  // namespace fnlab
