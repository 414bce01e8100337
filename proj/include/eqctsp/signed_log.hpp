#pragma once

#include <cmath>
#include <limits>

namespace eqctsp {

/// Sign + natural-log-magnitude representation of a real number.
///
/// Products of hundreds of |cos| factors underflow doubles long before the
/// ordering information is lost; carrying (sign, log|x|) keeps comparisons
/// exact in sign and monotone in magnitude at any problem size.
struct SignedLogValue {
  int sign = 0;  // -1, 0, +1
  double log_mag = -std::numeric_limits<double>::infinity();

  static SignedLogValue zero() { return {}; }

  static SignedLogValue from_linear(double x) {
    if (x == 0.0) return zero();
    return {x > 0.0 ? 1 : -1, std::log(std::fabs(x))};
  }

  /// Linear-domain value; may under/overflow double for extreme magnitudes.
  double to_linear() const {
    if (sign == 0) return 0.0;
    return static_cast<double>(sign) * std::exp(log_mag);
  }

  bool is_zero() const { return sign == 0; }
};

/// Strict value-order comparison: a < b as real numbers.
inline bool value_less(const SignedLogValue& a, const SignedLogValue& b) {
  if (a.sign != b.sign) return a.sign < b.sign;
  if (a.sign == 0) return false;
  if (a.sign > 0) return a.log_mag < b.log_mag;
  return a.log_mag > b.log_mag;  // more negative magnitude is smaller
}

inline bool value_equal(const SignedLogValue& a, const SignedLogValue& b) {
  if (a.sign != b.sign) return false;
  if (a.sign == 0) return true;
  return a.log_mag == b.log_mag;
}

}  // namespace eqctsp
