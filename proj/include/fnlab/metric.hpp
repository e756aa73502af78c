#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fnlab/types.hpp"

namespace fnlab {

enum class MetricKind { Flat, Conformal };

/// Physical metric on R^n. Conformal means exp(2 c |x - x0|^2) times the
/// Euclidean metric.
struct MetricPreset {
  MetricKind kind = MetricKind::Flat;
  double strength = 0.0;
  Vec origin;  // empty means the coordinate origin

  static MetricPreset flat() { return {}; }
  static MetricPreset conformal(double strength, Vec origin = {});

  std::string name() const;
  bool is_flat() const { return kind == MetricKind::Flat || strength == 0.0; }
  Mat at(const Vec& x) const;
  /// Christoffel symbols in Cartesian coordinates: entry k is the matrix (i, j).
  std::vector<Mat> christoffel_cartesian(const Vec& x) const;
};

/// The (0,2)-tensor added to the Hessian: zero or a multiple of the metric.
struct ChiPreset {
  double metric_multiple = 0.0;

  static ChiPreset zero() { return {}; }
  static ChiPreset scaled_metric(double c) { return {c}; }
  std::string name() const;
};

std::vector<Mat> zero_christoffel(int n);

/// Levi-Civita symbols of a metric field q -> g(q) by central differences
/// of step h: 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij).
template <class MetricFn>
std::vector<Mat> christoffel_by_differences(MetricFn&& g_of, const Vec& q, double h);

}  // namespace fnlab

#include "fnlab/metric_impl.hpp"
