#pragma once

#include <vector>

#include "fnlab/chart_grid.hpp"
#include "fnlab/metric.hpp"

namespace fnlab {

enum class ChristoffelMethod { Auto, Analytic, Differences };

/// Per-node metric, added tensor and Christoffel symbols, all in the node's
/// frame (chart coordinates, or Cartesian at the polar center).
struct MetricField {
  std::vector<Mat> g;
  std::vector<Mat> chi;
  std::vector<std::vector<Mat>> christoffel;  // [node][k](i, j)
  bool analytic_christoffel = true;
};

/// Christoffel symbols at every node. Analytic when the chart and metric
/// admit a closed form, otherwise central differences of the pulled-back
/// metric with step equal to the grid spacing.
std::vector<std::vector<Mat>> christoffel(const MetricPreset& metric, const ChartGrid& grid,
                                          ChristoffelMethod method = ChristoffelMethod::Auto);

/// Throws METRIC_NOT_SPD if the metric fails to be positive definite at a node.
MetricField build_metric_field(const ChartGrid& grid, const MetricPreset& metric,
                               const ChiPreset& chi,
                               ChristoffelMethod method = ChristoffelMethod::Auto);

/// Stencils of the covariant Hessian D_ij - Gamma^k_ij D_k per interior node,
/// stored as [node][i * n + j].
std::vector<std::vector<Stencil>> covariant_stencils(const ChartGrid& grid, const MetricField& m);

/// Covariant Hessian of a node field at each interior node.
std::vector<Mat> covariant_hessian(const Vec& u, const MetricField& m, const ChartGrid& grid);
Mat covariant_hessian_at(const Vec& u, const MetricField& m, const ChartGrid& grid, int node);

/// Frame gradient of a node field at an interior node.
Vec frame_gradient_at(const Vec& u, const ChartGrid& grid, int node);

}  // namespace fnlab
