#pragma once

#include <cmath>
#include <limits>
#include <string>

namespace fnlab {

/// A real number that may also be +inf or -inf. Operator limits on the cone
/// boundary (for example log of the product) live here.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double v) : value_(v) {}  // NOLINT(implicit)

  static constexpr ExtendedReal positive_infinity() {
    return ExtendedReal(std::numeric_limits<double>::infinity());
  }
  static constexpr ExtendedReal negative_infinity() {
    return ExtendedReal(-std::numeric_limits<double>::infinity());
  }

  bool is_finite() const { return std::isfinite(value_); }
  bool is_positive_infinity() const { return std::isinf(value_) && value_ > 0; }
  bool is_negative_infinity() const { return std::isinf(value_) && value_ < 0; }
  constexpr double value() const { return value_; }

  friend ExtendedReal operator-(ExtendedReal a, ExtendedReal b) {
    return ExtendedReal(a.value_ - b.value_);
  }
  friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    return ExtendedReal(a.value_ + b.value_);
  }
  friend bool operator<(ExtendedReal a, ExtendedReal b) { return a.value_ < b.value_; }
  friend bool operator>(ExtendedReal a, ExtendedReal b) { return a.value_ > b.value_; }
  friend bool operator<=(ExtendedReal a, ExtendedReal b) { return a.value_ <= b.value_; }
  friend bool operator>=(ExtendedReal a, ExtendedReal b) { return a.value_ >= b.value_; }
  friend bool operator==(ExtendedReal a, ExtendedReal b) { return a.value_ == b.value_; }

  /// "-inf", "+inf" or the shortest round-trip decimal.
  std::string to_string() const;

 private:
  double value_ = 0.0;
};

}  // namespace fnlab
