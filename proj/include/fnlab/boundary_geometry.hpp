#pragma once

#include <vector>

#include "fnlab/chart_grid.hpp"
#include "fnlab/cone.hpp"
#include "fnlab/metric.hpp"

namespace fnlab {

/// Distance to the boundary at every node (zero on boundary nodes) with its
/// physical gradient. The distance is Euclidean in physical coordinates; for
/// non-flat metrics it serves as a boundary-defining function.
struct BoundaryGeometry {
  Vec sigma;
  std::vector<Vec> sigma_gradient;
};

/// Throws UNSUPPORTED_DOMAIN for presets without a smooth boundary.
BoundaryGeometry boundary_distance(const ChartGrid& grid);

/// Distance from every node to an anchor node: Euclidean for flat metrics,
/// shortest paths along stencil edges otherwise.
Vec distance_to_anchor(const ChartGrid& grid, const MetricPreset& metric, int anchor);

/// Nodes with rho < delta.
std::vector<int> collar_nodes(const Vec& rho, double delta);

/// Principal curvatures at a boundary point with respect to the inward normal;
/// a disk of radius R gives 1/R.
Vec principal_curvatures_at(const DomainSpec& domain, const MetricPreset& metric, const Vec& x);

struct CurvatureField {
  std::vector<int> nodes;    // boundary node ids
  std::vector<Vec> kappa;    // ascending curvatures per node
};

CurvatureField principal_curvatures(const ChartGrid& grid, const MetricPreset& metric);

/// Projection of the cone along its last axis: Garding order k in R^n gives
/// order k-1 in R^{n-1}, the half-space gives the whole space.
ConeSpec gamma_infinity(const ConeSpec& cone);

/// Membership of lambda' in the projected cone tested directly on the
/// original cone with a large last entry.
bool projected_cone_contains(const ConeSpec& cone, const Vec& lambda_prime);

struct BoundaryConeReport {
  bool passed = true;
  int worst_node = -1;
  double worst_distance = 0.0;  // signed distance of -kappa to the projected cone
  Vec worst_kappa;
  std::vector<double> distances;  // per entry of the curvature field
};

/// Closure membership of -kappa in the projected cone at every boundary node.
BoundaryConeReport check_boundary_cone_condition(const CurvatureField& kappa, const ConeSpec& cone);

}  // namespace fnlab
