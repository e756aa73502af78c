#pragma once

#include <functional>
#include <vector>

#include "fnlab/domain.hpp"
#include "fnlab/types.hpp"

namespace fnlab {

enum class ChartKind { Cartesian, Polar };

struct StencilTerm {
  int node;
  double weight;
};
using Stencil = std::vector<StencilTerm>;

double apply(const Stencil& s, const Vec& values);

struct GridNode {
  Vec chart;     // chart coordinates; (r, theta) in the polar chart
  Vec physical;
  bool boundary = false;
  bool pole = false;  // polar-chart origin, whose derivatives live in a Cartesian frame
};

/// Nodes of one chart covering a domain preset. Interior (unknown) nodes come
/// first, boundary nodes after; boundary nodes lie on the boundary.
///
/// Cartesian charts: lattice nodes deeper than 1e-3 h are interior. A stencil
/// arm that leaves the interior is cut at the boundary crossing, which becomes
/// a boundary node, and the missing lattice value is replaced by the linear
/// extrapolation through the node and the crossing.
///
/// Polar charts (disk or annulus, planar): rings r_i with the angle split into
/// a multiple of 4 so the axes carry nodes. The disk center is one node with
/// Cartesian-frame derivatives read off the Fourier modes of the first ring.
class ChartGrid {
 public:
  static ChartGrid build(const DomainSpec& domain, ChartKind chart, double h,
                         int angular_count = 0);

  int dimension() const { return domain_.dimension(); }
  ChartKind chart() const { return chart_; }
  const DomainSpec& domain() const { return domain_; }
  double spacing() const { return h_; }
  int angular_count() const { return angular_count_; }
  double radial_spacing() const { return radial_spacing_; }

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int interior_count() const { return interior_count_; }
  int boundary_count() const { return node_count() - interior_count_; }
  bool is_boundary(int node) const { return node >= interior_count_; }
  const GridNode& node(int i) const { return nodes_[i]; }
  const std::vector<GridNode>& nodes() const { return nodes_; }

  /// Frame-coordinate derivative stencils at an interior node. Throws
  /// STENCIL_OUT_OF_DOMAIN for boundary nodes.
  const Stencil& first(int node, int k) const;
  const Stencil& second(int node, int i, int j) const;

  /// d(physical)/d(frame) at a node; identity for Cartesian frames.
  Mat frame_jacobian(int node) const;

  Vec chart_to_physical(const Vec& q) const;
  Mat chart_jacobian(const Vec& q) const;

  /// Smallest crossing fraction used by any cut stencil arm (1 if none).
  double min_crossing_fraction() const { return min_crossing_; }

  Vec sample(const std::function<double(const Vec&)>& f) const;

 private:
  ChartGrid(const DomainSpec& domain, ChartKind chart, double h)
      : domain_(domain), chart_(chart), h_(h) {}

  void build_cartesian();
  void build_polar(int angular_count);

  DomainSpec domain_;
  ChartKind chart_;
  double h_;
  int angular_count_ = 0;
  double radial_spacing_ = 0.0;
  double min_crossing_ = 1.0;
  int interior_count_ = 0;
  std::vector<GridNode> nodes_;
  std::vector<std::vector<Stencil>> first_;   // [interior node][k]
  std::vector<std::vector<Stencil>> second_;  // [interior node][i * n + j]
};

}  // namespace fnlab
