#pragma once

#include <vector>

#include "fnlab/chart_grid.hpp"
#include "fnlab/metric.hpp"

namespace fnlab {

/// Physical first and covariant second derivatives at a boundary node.
struct BoundaryJet {
  Vec gradient;
  Mat hessian;
};

/// Weighted least-squares cubic fits around each boundary node, precomputed as
/// linear stencils so a jet costs one pass over the neighborhood. One-sided
/// derivatives are the only ones available on the boundary; the cubic keeps
/// second derivatives second-order accurate for smooth data.
class BoundaryJetFitter {
 public:
  /// `radius` <= 0 selects max(3.5 h, 1.5 sqrt(h L)) with L the domain half-width.
  /// Near-boundary solution errors are O(h^2) but not smooth, so an h-scale fit
  /// turns them into O(1) Hessian errors; the sqrt(h) radius balances that
  /// against the fit truncation and gives first-order Hessians.
  BoundaryJetFitter(const ChartGrid& grid, const MetricPreset& metric, double radius = 0.0);

  double radius() const { return radius_; }

  int boundary_count() const { return static_cast<int>(nodes_.size()); }
  int node(int b) const { return nodes_[b]; }

  /// Jet at the b-th boundary node (grid node id node(b)).
  BoundaryJet jet(const Vec& u, int b) const;

  /// Plain partial derivatives at the b-th boundary node, no Christoffel terms.
  BoundaryJet partials(const Vec& u, int b) const;

  /// Physical metric at the b-th boundary node.
  Mat metric_at(int b) const;

 private:
  struct Plan {
    std::vector<int> neighbors;
    Mat gradient_weights;  // n x k
    Mat hessian_weights;   // n*n x k
  };

  const ChartGrid* grid_;
  MetricPreset metric_;
  double radius_ = 0.0;
  std::vector<int> nodes_;
  std::vector<Plan> plans_;
};

/// Suprema the continuation and the estimate audits track.
struct FieldSummary {
  double sup_laplacian = 0.0;           // interior nodes
  int sup_laplacian_node = -1;
  double sup_gradient = 0.0;            // all nodes, |du|_g
  int sup_gradient_node = -1;
  double sup_boundary_laplacian = 0.0;  // boundary nodes, from the fits
  int sup_boundary_laplacian_node = -1;
};

struct MetricField;
FieldSummary summarize_field(const ChartGrid& grid, const MetricField& field,
                             const BoundaryJetFitter& fitter, const Vec& u);

}  // namespace fnlab
