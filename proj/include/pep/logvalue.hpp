#pragma once

#include <cmath>
#include <limits>

namespace pep {

/// A nonnegative (or signed) quantity stored as log|x| plus a sign,
/// so that products and ratios of astronomically large factors never
/// leave the representable range.
struct LogValue {
  double log_magnitude = -std::numeric_limits<double>::infinity();
  int sign = 0;  // 0 iff the value is exactly zero

  static LogValue zero() { return {}; }

  static LogValue from_log(double lm, int s = 1) {
    LogValue v;
    v.log_magnitude = lm;
    v.sign = s;
    return v;
  }

  static LogValue from_value(double x) {
    LogValue v;
    if (x == 0.0) return v;
    v.sign = x > 0 ? 1 : -1;
    v.log_magnitude = std::log(std::fabs(x));
    return v;
  }

  double value() const {
    if (sign == 0) return 0.0;
    return sign * std::exp(log_magnitude);
  }

  bool is_zero() const { return sign == 0; }
  bool finite() const { return sign == 0 || std::isfinite(log_magnitude); }
};

inline LogValue operator*(const LogValue& a, const LogValue& b) {
  if (a.sign == 0 || b.sign == 0) return LogValue::zero();
  return LogValue::from_log(a.log_magnitude + b.log_magnitude, a.sign * b.sign);
}

inline LogValue operator/(const LogValue& a, const LogValue& b) {
  if (a.sign == 0) return LogValue::zero();
  return LogValue::from_log(a.log_magnitude - b.log_magnitude, a.sign * b.sign);
}

}  // namespace pep
