#include "fnlab/boundary_geometry.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <limits>
#include <queue>
#include <set>

#include "fnlab/error.hpp"

namespace fnlab {

BoundaryGeometry boundary_distance(const ChartGrid& grid) {
  const auto& domain = grid.domain();
  if (!domain.has_smooth_boundary()) {
    throw Error(ErrorCode::UnsupportedDomain, domain.name() + " has no smooth distance function");
  }
  BoundaryGeometry b;
  b.sigma.resize(grid.node_count());
  b.sigma_gradient.resize(grid.node_count());
  for (int i = 0; i < grid.node_count(); ++i) {
    const Vec& x = grid.node(i).physical;
    b.sigma(i) = grid.is_boundary(i) ? 0.0 : -domain.signed_distance(x);
    b.sigma_gradient[i] = -domain.signed_distance_gradient(x);
  }
  return b;
}

Vec distance_to_anchor(const ChartGrid& grid, const MetricPreset& metric, int anchor) {
  const int count = grid.node_count();
  const Vec& x0 = grid.node(anchor).physical;
  Vec rho(count);
  if (metric.is_flat()) {
    for (int i = 0; i < count; ++i) rho(i) = (grid.node(i).physical - x0).norm();
    return rho;
  }
  // Nodes that share a stencil are joined, which links boundary nodes to
  // each other and adds knight moves to the lattice graph.
  std::vector<std::set<int>> adj(count);
  const int n = grid.dimension();
  for (int node = 0; node < grid.interior_count(); ++node) {
    std::set<int> patch = {node};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (const auto& t : grid.second(node, i, j)) patch.insert(t.node);
    for (int a : patch)
      for (int b : patch)
        if (a < b) {
          adj[a].insert(b);
          adj[b].insert(a);
        }
  }
  auto length = [&](int a, int b) {
    const Vec d = grid.node(b).physical - grid.node(a).physical;
    const Mat g = metric.at(0.5 * (grid.node(a).physical + grid.node(b).physical));
    return std::sqrt(d.dot(g * d));
  };
  rho.setConstant(std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  rho(anchor) = 0.0;
  queue.push({0.0, anchor});
  while (!queue.empty()) {
    const auto [d, a] = queue.top();
    queue.pop();
    if (d > rho(a)) continue;
    for (int b : adj[a]) {
      const double nd = d + length(a, b);
      if (nd < rho(b)) {
        rho(b) = nd;
        queue.push({nd, b});
      }
    }
  }
  return rho;
}

std::vector<int> collar_nodes(const Vec& rho, double delta) {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < rho.size(); ++i)
    if (rho(i) < delta) out.push_back(static_cast<int>(i));
  return out;
}

Vec principal_curvatures_at(const DomainSpec& domain, const MetricPreset& metric, const Vec& x) {
  if (!domain.has_smooth_boundary()) {
    throw Error(ErrorCode::UnsupportedDomain, domain.name() + " has no smooth boundary");
  }
  const int n = static_cast<int>(x.size());
  const Vec ds = -domain.signed_distance_gradient(x);
  Mat hess = -domain.signed_distance_hessian(x);
  const auto gamma = metric.christoffel_cartesian(x);
  for (int k = 0; k < n; ++k) hess -= ds(k) * gamma[k];
  const Mat g = metric.at(x);
  const double grad_norm = std::sqrt(ds.dot(g.llt().solve(ds)));
  // Euclidean orthonormal basis of the tangent space {X : ds . X = 0}.
  Eigen::HouseholderQR<Mat> qr(ds);
  const Mat q = qr.householderQ();
  const Mat t = q.rightCols(n - 1);
  const Mat second_form = -(t.transpose() * hess * t) / grad_norm;
  const Mat gt = t.transpose() * g * t;
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(0.5 * (second_form + second_form.transpose()), gt,
                                                   Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  return es.eigenvalues();
}

CurvatureField principal_curvatures(const ChartGrid& grid, const MetricPreset& metric) {
  CurvatureField field;
  for (int i = grid.interior_count(); i < grid.node_count(); ++i) {
    field.nodes.push_back(i);
    field.kappa.push_back(principal_curvatures_at(grid.domain(), metric, grid.node(i).physical));
  }
  return field;
}

ConeSpec gamma_infinity(const ConeSpec& cone) {
  const int n = cone.dimension();
  if (n < 2) throw Error(ErrorCode::ValidationError, "projected cone needs n >= 2");
  if (cone.is_whole_space() || cone.order() <= 1) return ConeSpec::whole_space(n - 1);
  return ConeSpec::garding(n - 1, cone.order() - 1);
}

bool projected_cone_contains(const ConeSpec& cone, const Vec& lambda_prime) {
  Vec full(lambda_prime.size() + 1);
  full << lambda_prime, 1e8 * (1.0 + lambda_prime.norm());
  return cone.contains(full);
}

BoundaryConeReport check_boundary_cone_condition(const CurvatureField& kappa, const ConeSpec& cone) {
  const ConeSpec projected = gamma_infinity(cone);
  BoundaryConeReport r;
  r.worst_distance = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < kappa.nodes.size(); ++e) {
    const Vec neg = -kappa.kappa[e];
    const double d = projected.signed_distance(neg);
    r.distances.push_back(d);
    if (d < r.worst_distance) {
      r.worst_distance = d;
      r.worst_node = kappa.nodes[e];
      r.worst_kappa = kappa.kappa[e];
    }
    if (d < -ConeSpec::membership_tolerance(neg)) r.passed = false;
  }
  return r;
}

}  // namespace fnlab
