#include "fnlab/metric.hpp"

#include <cmath>
#include <sstream>

namespace fnlab {

MetricPreset MetricPreset::conformal(double strength, Vec origin) {
  MetricPreset m;
  m.kind = MetricKind::Conformal;
  m.strength = strength;
  m.origin = std::move(origin);
  return m;
}

std::string MetricPreset::name() const {
  if (kind == MetricKind::Flat) return "flat";
  std::ostringstream os;
  os << "conformal(c=" << strength << ")";
  return os.str();
}

Mat MetricPreset::at(const Vec& x) const {
  const int n = static_cast<int>(x.size());
  if (kind == MetricKind::Flat) return Mat::Identity(n, n);
  const Vec y = origin.size() == 0 ? x : Vec(x - origin);
  return std::exp(2.0 * strength * y.squaredNorm()) * Mat::Identity(n, n);
}

std::vector<Mat> MetricPreset::christoffel_cartesian(const Vec& x) const {
  const int n = static_cast<int>(x.size());
  std::vector<Mat> gamma = zero_christoffel(n);
  if (kind == MetricKind::Flat) return gamma;
  // g = e^{2w} delta: Gamma^k_ij = delta_ik w_j + delta_jk w_i - delta_ij w_k.
  const Vec y = origin.size() == 0 ? x : Vec(x - origin);
  const Vec dw = 2.0 * strength * y;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      gamma[k](k, i) += dw(i);
      gamma[k](i, k) += dw(i);
      gamma[k](i, i) -= dw(k);
    }
  }
  return gamma;
}

std::string ChiPreset::name() const {
  if (metric_multiple == 0.0) return "zero";
  std::ostringstream os;
  os << "scaled_metric(c=" << metric_multiple << ")";
  return os.str();
}

std::vector<Mat> zero_christoffel(int n) { return std::vector<Mat>(n, Mat::Zero(n, n)); }

}  // namespace fnlab
