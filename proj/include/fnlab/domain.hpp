#pragma once

#include <string>
#include <vector>

#include "fnlab/types.hpp"

namespace fnlab {

enum class DomainKind { Disk, Annulus, Box, RoundedBox };

/// Physical domain preset described by a signed distance function that is
/// negative inside. Disk means a ball in any dimension.
class DomainSpec {
 public:
  static DomainSpec disk(int dimension, double radius, Vec center = {});
  static DomainSpec annulus(double inner_radius, double outer_radius, Vec center = {});
  /// Axis-aligned box; periodic axes have no boundary in that direction.
  static DomainSpec box(Vec lower, Vec upper, std::vector<bool> periodic = {});
  static DomainSpec rounded_box(Vec lower, Vec upper, double corner_radius);

  DomainKind kind() const { return kind_; }
  int dimension() const { return static_cast<int>(center_.size()); }
  std::string name() const;
  const Vec& center() const { return center_; }
  double radius() const { return radius_; }
  double inner_radius() const { return inner_radius_; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  double corner_radius() const { return corner_radius_; }
  bool is_periodic(int axis) const;

  /// Boundary smooth enough for distance derivatives and curvatures. A box
  /// qualifies only when at most one axis is non-periodic.
  bool has_smooth_boundary() const;

  double signed_distance(const Vec& x) const;
  Vec signed_distance_gradient(const Vec& x) const;
  Mat signed_distance_hessian(const Vec& x) const;

  /// Closest boundary point for x near the boundary.
  Vec project_to_boundary(const Vec& x) const;

  /// Axis-aligned bounding box of the closed domain.
  Vec bounding_lower() const;
  Vec bounding_upper() const;

 private:
  DomainSpec() = default;

  DomainKind kind_ = DomainKind::Disk;
  Vec center_;
  double radius_ = 1.0;
  double inner_radius_ = 0.0;
  Vec lower_;
  Vec upper_;
  std::vector<bool> periodic_;
  double corner_radius_ = 0.0;
};

}  // namespace fnlab
