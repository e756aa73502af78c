#include "fnlab/expression.hpp"

#include <cmath>

#include "fnlab/error.hpp"
#include "fnlab/json_util.hpp"

namespace fnlab {

namespace {

Vec shifted(const Vec& x, const Vec& center) { return center.size() == 0 ? x : Vec(x - center); }

}  // namespace

Expression Expression::constant(double c) {
  Expression e;
  e.kind_ = "constant";
  e.c_ = c;
  return e;
}

Expression Expression::affine(Vec b, double c) {
  Expression e;
  e.kind_ = "affine";
  e.b_ = std::move(b);
  e.c_ = c;
  return e;
}

Expression Expression::quadratic_form(Mat m, Vec b, double c) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::ValidationError, "quadratic_form matrix must be square");
  Expression e;
  e.kind_ = "quadratic_form";
  e.m_ = std::move(m);
  e.b_ = b.size() == 0 ? Vec::Zero(e.m_.rows()) : std::move(b);
  if (e.b_.size() != e.m_.rows()) throw Error(ErrorCode::ValidationError, "quadratic_form linear part has wrong length");
  e.c_ = c;
  return e;
}

Expression Expression::radial_power(double a, double p, double c, Vec center) {
  Expression e;
  e.kind_ = "radial_power";
  e.a_ = a;
  e.p_ = p;
  e.c_ = c;
  e.center_ = std::move(center);
  return e;
}

Expression Expression::radial_polynomial(Vec coefficients, Vec center) {
  Expression e;
  e.kind_ = "radial_polynomial";
  e.coefficients_ = std::move(coefficients);
  e.center_ = std::move(center);
  return e;
}

Expression Expression::table(std::vector<Vec> points, std::vector<double> values, std::string source) {
  if (points.size() != values.size()) throw Error(ErrorCode::ValidationError, "table points and values differ in length");
  Expression e;
  e.kind_ = "csv";
  e.points_ = std::move(points);
  e.values_ = std::move(values);
  e.source_ = std::move(source);
  return e;
}

double Expression::operator()(const Vec& x) const {
  if (kind_ == "constant") return c_;
  if (kind_ == "affine") {
    if (b_.size() != x.size()) throw Error(ErrorCode::ValidationError, "affine coefficients have wrong length");
    return b_.dot(x) + c_;
  }
  if (kind_ == "quadratic_form") {
    if (m_.rows() != x.size()) throw Error(ErrorCode::ValidationError, "quadratic_form has wrong dimension");
    return x.dot(m_ * x) + b_.dot(x) + c_;
  }
  if (kind_ == "radial_power") {
    const double r = shifted(x, center_).norm();
    return a_ * std::pow(r, p_) + c_;
  }
  if (kind_ == "radial_polynomial") {
    const double r = shifted(x, center_).norm();
    double acc = 0.0;
    for (Eigen::Index k = coefficients_.size() - 1; k >= 0; --k) acc = acc * r + coefficients_(k);
    return acc;
  }
  if (kind_ == "csv") {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (points_[i].size() == x.size() && (points_[i] - x).norm() <= 1e-9 * (1.0 + x.norm())) return values_[i];
    }
    throw Error(ErrorCode::ValidationError, "csv field " + source_ + " has no value at a grid node");
  }
  throw Error(ErrorCode::ValidationError, "unknown expression kind " + kind_);
}

nlohmann::ordered_json Expression::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = kind_;
  if (kind_ == "constant") {
    j["value"] = c_;
  } else if (kind_ == "affine") {
    j["coefficients"] = json_vector(b_);
    j["offset"] = c_;
  } else if (kind_ == "quadratic_form") {
    j["matrix"] = json_matrix(m_);
    j["linear"] = json_vector(b_);
    j["offset"] = c_;
  } else if (kind_ == "radial_power") {
    j["coefficient"] = a_;
    j["power"] = p_;
    j["offset"] = c_;
    if (center_.size() > 0) j["center"] = json_vector(center_);
  } else if (kind_ == "radial_polynomial") {
    j["coefficients"] = json_vector(coefficients_);
    if (center_.size() > 0) j["center"] = json_vector(center_);
  } else if (kind_ == "csv") {
    j["path"] = source_;
  }
  return j;
}

const std::vector<std::string>& expression_catalog() {
  static const std::vector<std::string> names = {"constant", "affine", "quadratic_form",
                                                 "radial_power", "radial_polynomial", "csv"};
  return names;
}

}  // namespace fnlab
