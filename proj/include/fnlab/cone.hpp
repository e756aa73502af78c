#pragma once

#include <string>

#include "fnlab/types.hpp"

namespace fnlab {

enum class ConeRegion { Interior, Boundary, Outside };

struct ConeMembership {
  ConeRegion region = ConeRegion::Outside;
  double signed_distance = 0.0;
};

/// Garding cone Gamma_k = {sigma_1 > 0, ..., sigma_k > 0} in R^n. Order k = n is
/// the positive cone, k = 1 the half-space {sum > 0}; order 0 stands for the
/// whole space, which only arises as a projected cone.
class ConeSpec {
 public:
  static ConeSpec garding(int dimension, int order);
  static ConeSpec positive(int dimension) { return garding(dimension, dimension); }
  static ConeSpec whole_space(int dimension);

  int dimension() const { return dimension_; }
  int order() const { return order_; }
  bool is_whole_space() const { return order_ == 0; }
  std::string name() const;

  /// Open-cone predicate (every sigma_j with j <= order strictly positive).
  bool contains(const Vec& lambda) const;

  /// Euclidean distance to the cone boundary, negative outside the closure.
  /// +inf for the whole space.
  double signed_distance(const Vec& lambda) const;

  /// Classification with the scale-aware slack 1e-12 * (1 + |lambda|).
  ConeMembership classify(const Vec& lambda) const;

  /// Same answer as classify(lambda).region == Interior, with a cheap
  /// sufficient test first: lambda - tol * 1 in the cone implies distance >= tol.
  bool is_interior(const Vec& lambda) const;

  /// Smallest s with w + s * (1,...,1) in the closed cone.
  double boundary_shift(const Vec& w) const;

  static double membership_tolerance(const Vec& lambda);

  friend bool operator==(const ConeSpec&, const ConeSpec&) = default;

 private:
  ConeSpec(int dimension, int order) : dimension_(dimension), order_(order) {}

  double boundary_distance_numeric(const Vec& lambda) const;

  int dimension_ = 2;
  int order_ = 2;
};

inline ConeMembership cone_contains(const ConeSpec& cone, const Vec& lambda) {
  return cone.classify(lambda);
}

/// sigma_0..sigma_k of lambda; entry j is the j-th elementary symmetric polynomial.
Vec elementary_symmetric(const Vec& lambda, int max_order);

/// sigma_k of lambda with entry `skip` removed.
double elementary_symmetric_without(const Vec& lambda, int order, int skip);

}  // namespace fnlab
