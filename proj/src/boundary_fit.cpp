#include "fnlab/boundary_fit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "fnlab/error.hpp"
#include "fnlab/metric_field.hpp"

namespace fnlab {

namespace {

// Exponent vectors of all monomials of total degree <= 3, constant first,
// then the linear ones in axis order.
std::vector<std::vector<int>> monomials(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> e(n, 0);
  for (int degree = 0; degree <= 3; ++degree) {
    // Enumerate compositions of `degree` into n parts.
    std::vector<int> cur(n, 0);
    std::function<void(int, int)> rec = [&](int axis, int left) {
      if (axis == n - 1) {
        cur[axis] = left;
        out.push_back(cur);
        return;
      }
      for (int d = left; d >= 0; --d) {
        cur[axis] = d;
        rec(axis + 1, left - d);
      }
    };
    rec(0, degree);
  }
  return out;
}

double monomial_value(const std::vector<int>& e, const Vec& z) {
  double v = 1.0;
  for (std::size_t i = 0; i < e.size(); ++i)
    for (int p = 0; p < e[i]; ++p) v *= z(static_cast<Eigen::Index>(i));
  return v;
}

}  // namespace

BoundaryJetFitter::BoundaryJetFitter(const ChartGrid& grid, const MetricPreset& metric, double radius)
    : grid_(&grid), metric_(metric) {
  const int n = grid.dimension();
  const double h = grid.spacing();
  const double half_width =
      0.5 * (grid.domain().bounding_upper() - grid.domain().bounding_lower()).maxCoeff();
  radius_ = radius > 0.0 ? radius : std::max(3.5 * h, 1.5 * std::sqrt(h * half_width));
  const auto basis = monomials(n);
  const int m = static_cast<int>(basis.size());

  // Indices of the first- and second-order monomials inside the basis.
  std::vector<int> linear(n, -1);
  std::vector<int> quadratic(n * n, -1);
  for (int c = 0; c < m; ++c) {
    int total = 0;
    for (int v : basis[c]) total += v;
    if (total == 1) {
      for (int i = 0; i < n; ++i)
        if (basis[c][i] == 1) linear[i] = c;
    } else if (total == 2) {
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          const bool match = (i == j) ? basis[c][i] == 2 : (basis[c][i] == 1 && basis[c][j] == 1);
          if (match) quadratic[i * n + j] = quadratic[j * n + i] = c;
        }
      }
    }
  }

  for (int b = grid.interior_count(); b < grid.node_count(); ++b) {
    const Vec& xb = grid.node(b).physical;
    Plan plan;
    bool done = false;
    for (double r = radius_; r <= 2.5 * radius_ && !done; r *= 1.25) {
      plan.neighbors.clear();
      for (int k = 0; k < grid.node_count(); ++k) {
        if ((grid.node(k).physical - xb).norm() <= r) plan.neighbors.push_back(k);
      }
      const int count = static_cast<int>(plan.neighbors.size());
      if (count < 2 * m) continue;
      Mat a(count, m);
      Vec w(count);
      for (int row = 0; row < count; ++row) {
        const Vec z = (grid.node(plan.neighbors[row]).physical - xb) / radius_;
        w(row) = std::sqrt(1.0 / (1.0 + z.squaredNorm()));
        for (int c = 0; c < m; ++c) a(row, c) = w(row) * monomial_value(basis[c], z);
      }
      Eigen::ColPivHouseholderQR<Mat> qr(a);
      if (qr.rank() < m) continue;
      // A P = Q R, so the weighted fit is P R^{-1} Q_thin^T diag(w).
      const Mat q_thin = qr.householderQ() * Mat::Identity(count, m);
      const Mat r_inv_qt = qr.matrixR().topLeftCorner(m, m).triangularView<Eigen::Upper>().solve(q_thin.transpose());
      const Mat coeff = qr.colsPermutation() * (r_inv_qt * w.asDiagonal());  // m x count
      plan.gradient_weights.resize(n, count);
      plan.hessian_weights.resize(n * n, count);
      for (int i = 0; i < n; ++i) {
        plan.gradient_weights.row(i) = coeff.row(linear[i]) / radius_;
        for (int j = 0; j < n; ++j) {
          const double factor = (i == j) ? 2.0 : 1.0;
          plan.hessian_weights.row(i * n + j) = factor * coeff.row(quadratic[i * n + j]) / (radius_ * radius_);
        }
      }
      done = true;
    }
    if (!done) {
      throw Error(ErrorCode::StencilOutOfDomain,
                  "too few nodes for a boundary fit at node " + std::to_string(b));
    }
    nodes_.push_back(b);
    plans_.push_back(std::move(plan));
  }
}

BoundaryJet BoundaryJetFitter::partials(const Vec& u, int b) const {
  const Plan& plan = plans_[b];
  const int n = grid_->dimension();
  Vec local(plan.neighbors.size());
  for (std::size_t r = 0; r < plan.neighbors.size(); ++r) local(static_cast<Eigen::Index>(r)) = u(plan.neighbors[r]);
  BoundaryJet jet;
  jet.gradient = plan.gradient_weights * local;
  const Vec flat = plan.hessian_weights * local;
  jet.hessian = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) jet.hessian(i, j) = flat(i * n + j);
  jet.hessian = 0.5 * (jet.hessian + jet.hessian.transpose()).eval();
  return jet;
}

Mat BoundaryJetFitter::metric_at(int b) const { return metric_.at(grid_->node(nodes_[b]).physical); }

BoundaryJet BoundaryJetFitter::jet(const Vec& u, int b) const {
  BoundaryJet jet = partials(u, b);
  if (metric_.is_flat()) return jet;
  const auto gamma = metric_.christoffel_cartesian(grid_->node(nodes_[b]).physical);
  for (std::size_t k = 0; k < gamma.size(); ++k) jet.hessian -= gamma[k] * jet.gradient(static_cast<Eigen::Index>(k));
  return jet;
}

FieldSummary summarize_field(const ChartGrid& grid, const MetricField& field,
                             const BoundaryJetFitter& fitter, const Vec& u) {
  FieldSummary s;
  s.sup_laplacian = -std::numeric_limits<double>::infinity();
  s.sup_boundary_laplacian = -std::numeric_limits<double>::infinity();
  const auto hess = covariant_hessian(u, field, grid);
  for (int i = 0; i < grid.interior_count(); ++i) {
    const Mat ginv = field.g[i].inverse();
    const double lap = (ginv * hess[i]).trace();
    if (lap > s.sup_laplacian) {
      s.sup_laplacian = lap;
      s.sup_laplacian_node = i;
    }
    const Vec du = frame_gradient_at(u, grid, i);
    const double grad = std::sqrt(std::max(0.0, du.dot(ginv * du)));
    if (grad > s.sup_gradient || s.sup_gradient_node < 0) {
      s.sup_gradient = grad;
      s.sup_gradient_node = i;
    }
  }
  for (int b = 0; b < fitter.boundary_count(); ++b) {
    const int node = fitter.node(b);
    const BoundaryJet jet = fitter.jet(u, b);
    const Mat ginv = fitter.metric_at(b).inverse();
    const double lap = (ginv * jet.hessian).trace();
    if (lap > s.sup_boundary_laplacian) {
      s.sup_boundary_laplacian = lap;
      s.sup_boundary_laplacian_node = node;
    }
    const double grad = std::sqrt(std::max(0.0, jet.gradient.dot(ginv * jet.gradient)));
    if (grad > s.sup_gradient) {
      s.sup_gradient = grad;
      s.sup_gradient_node = node;
    }
  }
  return s;
}

}  // namespace fnlab
