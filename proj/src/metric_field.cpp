#include "fnlab/metric_field.hpp"

#include <Eigen/Cholesky>
#include <map>

#include "fnlab/error.hpp"

namespace fnlab {

namespace {

Mat pulled_back(const ChartGrid& grid, const MetricPreset& metric, const Vec& q) {
  const Mat j = grid.chart_jacobian(q);
  return j.transpose() * metric.at(grid.chart_to_physical(q)) * j;
}

std::vector<Mat> polar_flat_christoffel(double r) {
  std::vector<Mat> gamma = zero_christoffel(2);
  gamma[0](1, 1) = -r;
  gamma[1](0, 1) = gamma[1](1, 0) = 1.0 / r;
  return gamma;
}

}  // namespace

std::vector<std::vector<Mat>> christoffel(const MetricPreset& metric, const ChartGrid& grid,
                                          ChristoffelMethod method) {
  const bool polar = grid.chart() == ChartKind::Polar;
  const bool closed_form = !polar || metric.is_flat();
  if (method == ChristoffelMethod::Analytic && !closed_form) {
    throw Error(ErrorCode::ValidationError, "no closed-form Christoffel symbols for this chart and metric");
  }
  const bool use_analytic = method != ChristoffelMethod::Differences && closed_form;
  const double h = grid.spacing();
  std::vector<std::vector<Mat>> out(grid.node_count());
  for (int i = 0; i < grid.node_count(); ++i) {
    const auto& nd = grid.node(i);
    if (!polar || nd.pole) {
      if (use_analytic) {
        out[i] = metric.christoffel_cartesian(nd.physical);
      } else {
        out[i] = christoffel_by_differences([&](const Vec& x) { return metric.at(x); }, nd.physical, h);
      }
    } else if (use_analytic) {
      out[i] = polar_flat_christoffel(nd.chart(0));
    } else {
      out[i] = christoffel_by_differences([&](const Vec& q) { return pulled_back(grid, metric, q); },
                                          nd.chart, h);
    }
  }
  return out;
}

MetricField build_metric_field(const ChartGrid& grid, const MetricPreset& metric, const ChiPreset& chi,
                               ChristoffelMethod method) {
  MetricField m;
  m.g.resize(grid.node_count());
  m.chi.resize(grid.node_count());
  for (int i = 0; i < grid.node_count(); ++i) {
    const Mat j = grid.frame_jacobian(i);
    m.g[i] = j.transpose() * metric.at(grid.node(i).physical) * j;
    Eigen::LLT<Mat> llt(m.g[i]);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::MetricNotSpd, "metric not positive definite at node " + std::to_string(i));
    }
    m.chi[i] = chi.metric_multiple * m.g[i];
  }
  m.christoffel = christoffel(metric, grid, method);
  m.analytic_christoffel =
      method != ChristoffelMethod::Differences && (grid.chart() == ChartKind::Cartesian || metric.is_flat());
  return m;
}

std::vector<std::vector<Stencil>> covariant_stencils(const ChartGrid& grid, const MetricField& m) {
  const int n = grid.dimension();
  std::vector<std::vector<Stencil>> out(grid.interior_count(), std::vector<Stencil>(n * n));
  for (int node = 0; node < grid.interior_count(); ++node) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        std::map<int, double> acc;
        for (const auto& t : grid.second(node, i, j)) acc[t.node] += t.weight;
        for (int k = 0; k < n; ++k) {
          const double gamma = m.christoffel[node][k](i, j);
          if (gamma == 0.0) continue;
          for (const auto& t : grid.first(node, k)) acc[t.node] -= gamma * t.weight;
        }
        Stencil s;
        s.reserve(acc.size());
        for (const auto& [idx, w] : acc)
          if (w != 0.0) s.push_back({idx, w});
        out[node][i * n + j] = s;
        out[node][j * n + i] = std::move(s);
      }
    }
  }
  return out;
}

Mat covariant_hessian_at(const Vec& u, const MetricField& m, const ChartGrid& grid, int node) {
  const int n = grid.dimension();
  Mat hess(n, n);
  const Vec du = frame_gradient_at(u, grid, node);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double v = apply(grid.second(node, i, j), u);
      for (int k = 0; k < n; ++k) v -= m.christoffel[node][k](i, j) * du(k);
      hess(i, j) = hess(j, i) = v;
    }
  }
  return hess;
}

std::vector<Mat> covariant_hessian(const Vec& u, const MetricField& m, const ChartGrid& grid) {
  if (u.size() != grid.node_count()) {
    throw Error(ErrorCode::StencilOutOfDomain, "field size does not match the grid");
  }
  std::vector<Mat> out(grid.interior_count());
  for (int node = 0; node < grid.interior_count(); ++node) out[node] = covariant_hessian_at(u, m, grid, node);
  return out;
}

Vec frame_gradient_at(const Vec& u, const ChartGrid& grid, int node) {
  const int n = grid.dimension();
  Vec du(n);
  for (int k = 0; k < n; ++k) du(k) = apply(grid.first(node, k), u);
  return du;
}

}  // namespace fnlab
