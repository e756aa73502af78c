#include "fnlab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fnlab/error.hpp"

namespace fnlab {

namespace {

Mat radial_hessian(const Vec& y) {
  const double r = y.norm();
  const int n = static_cast<int>(y.size());
  if (r == 0.0) return Mat::Zero(n, n);
  const Vec e = y / r;
  return (Mat::Identity(n, n) - e * e.transpose()) / r;
}

Vec radial_unit(const Vec& y) {
  const double r = y.norm();
  if (r == 0.0) {
    Vec e = Vec::Zero(y.size());
    e(0) = 1.0;
    return e;
  }
  return y / r;
}

}  // namespace

DomainSpec DomainSpec::disk(int dimension, double radius, Vec center) {
  if (dimension < 2) throw Error(ErrorCode::ValidationError, "disk needs dimension >= 2");
  if (!(radius > 0.0)) throw Error(ErrorCode::ValidationError, "disk radius must be positive");
  DomainSpec d;
  d.kind_ = DomainKind::Disk;
  d.center_ = center.size() == 0 ? Vec::Zero(dimension) : center;
  if (d.center_.size() != dimension) throw Error(ErrorCode::ValidationError, "disk center has wrong length");
  d.radius_ = radius;
  return d;
}

DomainSpec DomainSpec::annulus(double inner_radius, double outer_radius, Vec center) {
  if (!(inner_radius > 0.0) || !(outer_radius > inner_radius)) {
    throw Error(ErrorCode::ValidationError, "annulus needs 0 < inner < outer radius");
  }
  DomainSpec d;
  d.kind_ = DomainKind::Annulus;
  d.center_ = center.size() == 0 ? Vec::Zero(2) : center;
  if (d.center_.size() != 2) throw Error(ErrorCode::ValidationError, "annulus is planar");
  d.radius_ = outer_radius;
  d.inner_radius_ = inner_radius;
  return d;
}

DomainSpec DomainSpec::box(Vec lower, Vec upper, std::vector<bool> periodic) {
  if (lower.size() != upper.size() || lower.size() < 2) {
    throw Error(ErrorCode::ValidationError, "box corners must share a dimension >= 2");
  }
  if ((upper - lower).minCoeff() <= 0.0) throw Error(ErrorCode::ValidationError, "box upper must exceed lower");
  if (periodic.empty()) periodic.assign(lower.size(), false);
  if (static_cast<Eigen::Index>(periodic.size()) != lower.size()) {
    throw Error(ErrorCode::ValidationError, "periodic flags must match box dimension");
  }
  if (std::all_of(periodic.begin(), periodic.end(), [](bool p) { return p; })) {
    throw Error(ErrorCode::ValidationError, "a box needs at least one non-periodic axis");
  }
  DomainSpec d;
  d.kind_ = DomainKind::Box;
  d.lower_ = lower;
  d.upper_ = upper;
  d.center_ = 0.5 * (lower + upper);
  d.periodic_ = std::move(periodic);
  return d;
}

DomainSpec DomainSpec::rounded_box(Vec lower, Vec upper, double corner_radius) {
  DomainSpec d = box(lower, upper);
  const double half_min = 0.5 * (upper - lower).minCoeff();
  if (!(corner_radius > 0.0) || corner_radius >= half_min) {
    throw Error(ErrorCode::ValidationError, "corner radius must lie in (0, half the shortest side)");
  }
  d.kind_ = DomainKind::RoundedBox;
  d.corner_radius_ = corner_radius;
  return d;
}

std::string DomainSpec::name() const {
  switch (kind_) {
    case DomainKind::Disk: return "disk";
    case DomainKind::Annulus: return "annulus";
    case DomainKind::Box: return "box";
    case DomainKind::RoundedBox: return "rounded_box";
  }
  return "unknown";
}

bool DomainSpec::is_periodic(int axis) const {
  return (kind_ == DomainKind::Box) && periodic_[axis];
}

bool DomainSpec::has_smooth_boundary() const {
  if (kind_ != DomainKind::Box) return true;
  return std::count(periodic_.begin(), periodic_.end(), false) <= 1;
}

double DomainSpec::signed_distance(const Vec& x) const {
  switch (kind_) {
    case DomainKind::Disk:
      return (x - center_).norm() - radius_;
    case DomainKind::Annulus: {
      const double r = (x - center_).norm();
      return std::max(r - radius_, inner_radius_ - r);
    }
    case DomainKind::Box:
    case DomainKind::RoundedBox: {
      const Vec half = 0.5 * (upper_ - lower_);
      const Vec q = (x - center_).cwiseAbs() - half + Vec::Constant(x.size(), corner_radius_);
      double outside_sq = 0.0;
      double inside = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (is_periodic(static_cast<int>(i))) continue;
        outside_sq += std::max(q(i), 0.0) * std::max(q(i), 0.0);
        inside = std::max(inside, q(i));
      }
      return std::sqrt(outside_sq) + std::min(inside, 0.0) - corner_radius_;
    }
  }
  return 0.0;
}

Vec DomainSpec::signed_distance_gradient(const Vec& x) const {
  switch (kind_) {
    case DomainKind::Disk:
      return radial_unit(x - center_);
    case DomainKind::Annulus: {
      const Vec y = x - center_;
      const double r = y.norm();
      const Vec e = radial_unit(y);
      return (r - radius_ >= inner_radius_ - r) ? e : Vec(-e);
    }
    case DomainKind::Box:
    case DomainKind::RoundedBox: {
      const int n = static_cast<int>(x.size());
      const Vec y = x - center_;
      const Vec half = 0.5 * (upper_ - lower_);
      Vec q = y.cwiseAbs() - half + Vec::Constant(n, corner_radius_);
      Vec outer = Vec::Zero(n);
      int arg = -1;
      double inside = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        if (is_periodic(i)) continue;
        const double sgn = y(i) >= 0 ? 1.0 : -1.0;
        if (q(i) > 0) outer(i) = sgn * q(i);
        if (q(i) > inside) {
          inside = q(i);
          arg = i;
        }
      }
      if (outer.norm() > 0.0) return outer / outer.norm();
      Vec g = Vec::Zero(n);
      g(arg) = y(arg) >= 0 ? 1.0 : -1.0;
      return g;
    }
  }
  return Vec::Zero(x.size());
}

Mat DomainSpec::signed_distance_hessian(const Vec& x) const {
  const int n = static_cast<int>(x.size());
  switch (kind_) {
    case DomainKind::Disk:
      return radial_hessian(x - center_);
    case DomainKind::Annulus: {
      const Vec y = x - center_;
      const double r = y.norm();
      const Mat h = radial_hessian(y);
      return (r - radius_ >= inner_radius_ - r) ? h : Mat(-h);
    }
    case DomainKind::Box:
    case DomainKind::RoundedBox: {
      const Vec y = x - center_;
      const Vec half = 0.5 * (upper_ - lower_);
      const Vec q = y.cwiseAbs() - half + Vec::Constant(n, corner_radius_);
      Vec outer = Vec::Zero(n);
      std::vector<int> active;
      for (int i = 0; i < n; ++i) {
        if (is_periodic(i) || q(i) <= 0) continue;
        outer(i) = (y(i) >= 0 ? 1.0 : -1.0) * q(i);
        active.push_back(i);
      }
      Mat h = Mat::Zero(n, n);
      if (active.size() < 2) return h;
      // Distance to a corner point in the active coordinates.
      Vec sub(static_cast<Eigen::Index>(active.size()));
      for (std::size_t a = 0; a < active.size(); ++a) sub(a) = outer(active[a]);
      const Mat hs = radial_hessian(sub);
      for (std::size_t a = 0; a < active.size(); ++a)
        for (std::size_t b = 0; b < active.size(); ++b) h(active[a], active[b]) = hs(a, b);
      return h;
    }
  }
  return Mat::Zero(n, n);
}

Vec DomainSpec::project_to_boundary(const Vec& x) const {
  Vec p = x;
  for (int it = 0; it < 3; ++it) p -= signed_distance(p) * signed_distance_gradient(p);
  return p;
}

Vec DomainSpec::bounding_lower() const {
  if (kind_ == DomainKind::Disk || kind_ == DomainKind::Annulus) {
    return (center_.array() - radius_).matrix();
  }
  return lower_;
}

Vec DomainSpec::bounding_upper() const {
  if (kind_ == DomainKind::Disk || kind_ == DomainKind::Annulus) {
    return (center_.array() + radius_).matrix();
  }
  return upper_;
}

}  // namespace fnlab
