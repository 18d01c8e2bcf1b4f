#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>

namespace sbp {

/// Real number stored as a normalized mantissa and a binary exponent so that
/// products of thousands of rates neither overflow nor underflow.
///
/// The value is `mantissa * 2^exponent` with `0.5 <= |mantissa| < 1` (or an
/// exact zero).  Relative precision is that of `double` at every magnitude.
/// Magnitudes are limited to |log| <= kMaxLogMagnitude; crossing that limit
/// throws NumericOverflow.
class ScaledReal {
 public:
  static constexpr double kMaxLogMagnitude = 1.0e6;

  constexpr ScaledReal() = default;
  ScaledReal(double value);  // NOLINT(google-explicit-constructor)

  static ScaledReal from_log(int sign, double log_magnitude);
  /// mantissa * 2^exponent for an arbitrary finite mantissa.
  static ScaledReal from_parts(double mantissa, std::int64_t exponent);

  int sign() const { return mantissa_ > 0.0 ? 1 : (mantissa_ < 0.0 ? -1 : 0); }
  bool is_zero() const { return mantissa_ == 0.0; }
  /// Natural log of |x|; -inf for zero.
  double log_magnitude() const;
  /// Decimal value; +-inf or 0 when outside double range.
  double to_double() const;
  /// True when to_double() is finite and, for nonzero values, not subnormal.
  bool representable() const;

  double mantissa() const { return mantissa_; }
  std::int64_t exponent() const { return exponent_; }

  ScaledReal operator-() const;
  ScaledReal abs() const;

  friend ScaledReal operator+(const ScaledReal& a, const ScaledReal& b);
  friend ScaledReal operator-(const ScaledReal& a, const ScaledReal& b);
  friend ScaledReal operator*(const ScaledReal& a, const ScaledReal& b);
  friend ScaledReal operator/(const ScaledReal& a, const ScaledReal& b);

  ScaledReal& operator+=(const ScaledReal& o) { return *this = *this + o; }
  ScaledReal& operator-=(const ScaledReal& o) { return *this = *this - o; }
  ScaledReal& operator*=(const ScaledReal& o) { return *this = *this * o; }
  ScaledReal& operator/=(const ScaledReal& o) { return *this = *this / o; }

  friend bool operator==(const ScaledReal& a, const ScaledReal& b) {
    return a.mantissa_ == b.mantissa_ && (a.mantissa_ == 0.0 || a.exponent_ == b.exponent_);
  }
  friend bool operator<(const ScaledReal& a, const ScaledReal& b);
  friend bool operator>(const ScaledReal& a, const ScaledReal& b) { return b < a; }
  friend bool operator<=(const ScaledReal& a, const ScaledReal& b) { return !(b < a); }
  friend bool operator>=(const ScaledReal& a, const ScaledReal& b) { return !(a < b); }

  /// Compact text form: decimal when representable, otherwise "+e^<log>" / "-e^<log>".
  std::string to_string(int precision = 17) const;

 private:
  ScaledReal(double mantissa, std::int64_t exponent, bool /*raw*/)
      : mantissa_(mantissa), exponent_(exponent) {}
  static ScaledReal normalized(double mantissa, std::int64_t exponent);

  double mantissa_ = 0.0;
  std::int64_t exponent_ = 0;
};

/// |log|a| - log|b|| for equal-signed nonzero values, +inf if signs differ.
/// Two zeros compare as 0.
double log_distance(const ScaledReal& a, const ScaledReal& b);

/// Compensated sum of scaled terms.  All terms are rescaled to the largest
/// exponent and accumulated with Neumaier summation, so the result carries
/// O(eps) relative error with respect to sum |terms|.
class ScaledSum {
 public:
  void add(const ScaledReal& x);
  ScaledReal value() const;
  void clear();

 private:
  void rescale(std::int64_t new_exponent);

  double sum_ = 0.0;
  double compensation_ = 0.0;
  std::int64_t exponent_ = std::numeric_limits<std::int64_t>::min();
};

/// Dot product sum_k a[k] * b[k] with compensated accumulation.
ScaledReal scaled_dot(std::span<const double> a, std::span<const ScaledReal> b);

}  // namespace sbp
