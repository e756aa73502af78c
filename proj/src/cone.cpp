#include "fnlab/cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fnlab/error.hpp"

namespace fnlab {

Vec elementary_symmetric(const Vec& lambda, int max_order) {
  Vec e = Vec::Zero(max_order + 1);
  e(0) = 1.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    for (int j = std::min<int>(max_order, static_cast<int>(i) + 1); j >= 1; --j) {
      e(j) += lambda(i) * e(j - 1);
    }
  }
  return e;
}

double elementary_symmetric_without(const Vec& lambda, int order, int skip) {
  if (order < 0) return 0.0;
  Vec e = Vec::Zero(order + 1);
  e(0) = 1.0;
  int seen = 0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (i == skip) continue;
    ++seen;
    for (int j = std::min(order, seen); j >= 1; --j) e(j) += lambda(i) * e(j - 1);
  }
  return e(order);
}

ConeSpec ConeSpec::garding(int dimension, int order) {
  if (dimension < 1 || order < 1 || order > dimension) {
    throw Error(ErrorCode::ValidationError,
                "Garding cone needs 1 <= k <= n, got n=" + std::to_string(dimension) +
                    " k=" + std::to_string(order));
  }
  return ConeSpec(dimension, order);
}

ConeSpec ConeSpec::whole_space(int dimension) { return ConeSpec(dimension, 0); }

std::string ConeSpec::name() const {
  if (order_ == 0) return "R^" + std::to_string(dimension_);
  return "Gamma_" + std::to_string(order_) + "(n=" + std::to_string(dimension_) + ")";
}

bool ConeSpec::contains(const Vec& lambda) const {
  if (order_ == 0) return true;
  const Vec e = elementary_symmetric(lambda, order_);
  for (int j = 1; j <= order_; ++j) {
    if (!(e(j) > 0.0)) return false;
  }
  return true;
}

double ConeSpec::membership_tolerance(const Vec& lambda) {
  return 1e-12 * (1.0 + lambda.norm());
}

double ConeSpec::boundary_shift(const Vec& w) const {
  const double n = static_cast<double>(w.size());
  // The half-space bound and the positive-orthant bound bracket every
  // Garding cone between them.
  const double lo = -w.sum() / n;
  const double hi = -w.minCoeff();
  if (order_ == 1) return lo;
  if (order_ == dimension_) return hi;
  if (order_ == 0) return -std::numeric_limits<double>::infinity();
  double a = lo;
  double b = hi;
  const Vec ones = Vec::Ones(w.size());
  for (int it = 0; it < 200 && b - a > 1e-16 * (1.0 + std::abs(b)); ++it) {
    const double m = 0.5 * (a + b);
    if (contains(w + m * ones)) {
      b = m;
    } else {
      a = m;
    }
  }
  return b;
}

namespace {

double distance_to_ray(const Vec& x, const Vec& direction) {
  const double dd = direction.squaredNorm();
  const double t = std::max(0.0, x.dot(direction)) / dd;
  return (x - t * direction).norm();
}

// Orthonormal basis of the complement of (1,...,1).
Mat diagonal_complement_basis(int n) {
  Mat basis(n, n - 1);
  for (int j = 0; j < n - 1; ++j) {
    Vec v = Vec::Zero(n);
    // Helmert contrasts
    for (int i = 0; i <= j; ++i) v(i) = 1.0;
    v(j + 1) = -(j + 1.0);
    basis.col(j) = v.normalized();
  }
  return basis;
}

}  // namespace

double ConeSpec::boundary_distance_numeric(const Vec& lambda) const {
  // The boundary is the union of rays through w + tau(w) * 1 with w ranging
  // over the unit sphere of the complement of the diagonal.
  const int n = dimension_;
  const Mat basis = diagonal_complement_basis(n);
  const Vec ones = Vec::Ones(n);
  auto ray_distance = [&](const Vec& coords) {
    const Vec w = basis * coords.normalized();
    const Vec b = w + boundary_shift(w) * ones;
    return distance_to_ray(lambda, b);
  };

  if (n - 1 == 2) {
    // Circle of directions: dense scan, then golden-section refinement.
    constexpr int kSamples = 360;
    double best = std::numeric_limits<double>::infinity();
    double best_angle = 0.0;
    for (int s = 0; s < kSamples; ++s) {
      const double angle = 2.0 * std::numbers::pi * s / kSamples;
      Vec c(2);
      c << std::cos(angle), std::sin(angle);
      const double d = ray_distance(c);
      if (d < best) {
        best = d;
        best_angle = angle;
      }
    }
    const double step = 2.0 * std::numbers::pi / kSamples;
    double a = best_angle - step;
    double b = best_angle + step;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    auto eval = [&](double angle) {
      Vec c(2);
      c << std::cos(angle), std::sin(angle);
      return ray_distance(c);
    };
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = eval(x1);
    double f2 = eval(x2);
    for (int it = 0; it < 80; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - phi * (b - a);
        f1 = eval(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + phi * (b - a);
        f2 = eval(x2);
      }
    }
    return std::min(best, std::min(f1, f2));
  }

  // Higher dimensions: deterministic random scan plus a shrinking pattern search.
  std::mt19937_64 rng(0x5eedULL + static_cast<unsigned>(n));
  std::normal_distribution<double> normal;
  const int m = n - 1;
  double best = std::numeric_limits<double>::infinity();
  Vec best_c = Vec::Unit(m, 0);
  for (int s = 0; s < 500 * m; ++s) {
    Vec c(m);
    for (int i = 0; i < m; ++i) c(i) = normal(rng);
    if (c.norm() < 1e-12) continue;
    const double d = ray_distance(c);
    if (d < best) {
      best = d;
      best_c = c.normalized();
    }
  }
  double radius = 0.1;
  while (radius > 1e-10) {
    bool improved = false;
    for (int i = 0; i < m; ++i) {
      for (double sign : {1.0, -1.0}) {
        Vec c = best_c;
        c(i) += sign * radius;
        const double d = ray_distance(c);
        if (d < best) {
          best = d;
          best_c = c.normalized();
          improved = true;
        }
      }
    }
    if (!improved) radius *= 0.5;
  }
  return best;
}

double ConeSpec::signed_distance(const Vec& lambda) const {
  if (order_ == 0) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(dimension_);
  if (order_ == 1) return lambda.sum() / std::sqrt(n);
  if (order_ == dimension_) {
    const double mn = lambda.minCoeff();
    if (mn >= 0.0) return mn;
    return -lambda.cwiseMin(0.0).norm();
  }
  const double d = boundary_distance_numeric(lambda);
  return contains(lambda) ? d : -d;
}

bool ConeSpec::is_interior(const Vec& lambda) const {
  if (order_ == 0) return true;
  const double tol = membership_tolerance(lambda);
  if (contains(lambda - tol * Vec::Ones(lambda.size()))) return true;
  return classify(lambda).region == ConeRegion::Interior;
}

ConeMembership ConeSpec::classify(const Vec& lambda) const {
  ConeMembership m;
  m.signed_distance = signed_distance(lambda);
  const double tol = membership_tolerance(lambda);
  if (m.signed_distance > tol) {
    m.region = ConeRegion::Interior;
  } else if (m.signed_distance >= -tol) {
    m.region = ConeRegion::Boundary;
  } else {
    m.region = ConeRegion::Outside;
  }
  return m;
}

}  // namespace fnlab
