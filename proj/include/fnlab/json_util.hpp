#pragma once

#include <cmath>
#include <vector>

#include "json.hpp"

#include "fnlab/extended_real.hpp"
#include "fnlab/types.hpp"

namespace fnlab {

/// JSON has no infinities; non-finite values are written as strings.
inline nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "+inf" : "-inf";
}

inline nlohmann::ordered_json json_number(ExtendedReal v) { return json_number(v.value()); }

inline nlohmann::ordered_json json_vector(const Vec& v) {
  auto a = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(json_number(v(i)));
  return a;
}

inline nlohmann::ordered_json json_matrix(const Mat& m) {
  auto a = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(json_number(m(i, j)));
    a.push_back(row);
  }
  return a;
}

}  // namespace fnlab
