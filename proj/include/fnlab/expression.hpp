#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "fnlab/types.hpp"

namespace fnlab {

/// Named analytic field on physical coordinates from a fixed catalog:
///   constant            c
///   affine              b . x + c
///   quadratic_form      x^T M x + b . x + c
///   radial_power        a |x - x0|^p + c
///   radial_polynomial   sum_k c_k |x - x0|^k
///   table               values at listed points (exact position match)
class Expression {
 public:
  static Expression constant(double c);
  static Expression affine(Vec b, double c);
  static Expression quadratic_form(Mat m, Vec b, double c);
  static Expression radial_power(double a, double p, double c, Vec center = {});
  static Expression radial_polynomial(Vec coefficients, Vec center = {});
  static Expression table(std::vector<Vec> points, std::vector<double> values, std::string source);

  const std::string& kind() const { return kind_; }
  double operator()(const Vec& x) const;

  /// The catalog entry as it would appear in a config.
  nlohmann::ordered_json to_json() const;

 private:
  std::string kind_;
  double c_ = 0.0;
  double a_ = 0.0;
  double p_ = 0.0;
  Vec b_;
  Mat m_;
  Vec center_;
  Vec coefficients_;
  std::vector<Vec> points_;
  std::vector<double> values_;
  std::string source_;
};

const std::vector<std::string>& expression_catalog();

}  // namespace fnlab
