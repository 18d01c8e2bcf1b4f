#include "sbp/scaled_real.hpp"

#include <algorithm>
#include <cstdio>
#include <numbers>

#include "sbp/errors.hpp"

namespace sbp {

namespace {

constexpr double kLn2 = std::numbers::ln2;
// |exponent| beyond this means |log x| > kMaxLogMagnitude.
constexpr std::int64_t kMaxExponent =
    static_cast<std::int64_t>(ScaledReal::kMaxLogMagnitude / kLn2) + 1;
// Exponent gap past which the smaller addend cannot affect a double sum.
constexpr std::int64_t kNegligibleGap = 1100;

}  // namespace

ScaledReal::ScaledReal(double value) {
  if (!std::isfinite(value)) {
    throw NumericOverflow("ScaledReal constructed from a non-finite double");
  }
  if (value == 0.0) return;
  int e = 0;
  mantissa_ = std::frexp(value, &e);
  exponent_ = e;
}

ScaledReal ScaledReal::normalized(double mantissa, std::int64_t exponent) {
  if (mantissa == 0.0) return {};
  if (!std::isfinite(mantissa)) {
    throw NumericOverflow("non-finite mantissa in scaled arithmetic");
  }
  int e = 0;
  const double m = std::frexp(mantissa, &e);
  const std::int64_t total = exponent + e;
  if (total > kMaxExponent || total < -kMaxExponent) {
    throw NumericOverflow("scaled value exceeds |log magnitude| <= 1e6");
  }
  return ScaledReal(m, total, true);
}

ScaledReal ScaledReal::from_parts(double mantissa, std::int64_t exponent) {
  return normalized(mantissa, exponent);
}

ScaledReal ScaledReal::from_log(int sign, double log_magnitude) {
  if (sign == 0) return {};
  if (!std::isfinite(log_magnitude) || std::abs(log_magnitude) > kMaxLogMagnitude) {
    throw NumericOverflow("log magnitude out of range");
  }
  const double binary = log_magnitude / kLn2;
  const double whole = std::floor(binary);
  const double frac = std::exp2(binary - whole);
  return normalized(sign > 0 ? frac : -frac, static_cast<std::int64_t>(whole));
}

double ScaledReal::log_magnitude() const {
  if (mantissa_ == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(std::abs(mantissa_)) + static_cast<double>(exponent_) * kLn2;
}

double ScaledReal::to_double() const {
  if (mantissa_ == 0.0) return 0.0;
  if (exponent_ > 1100) return mantissa_ > 0 ? std::numeric_limits<double>::infinity()
                                             : -std::numeric_limits<double>::infinity();
  if (exponent_ < -1100) return 0.0;
  return std::ldexp(mantissa_, static_cast<int>(exponent_));
}

bool ScaledReal::representable() const {
  if (mantissa_ == 0.0) return true;
  const double v = to_double();
  return std::isfinite(v) && std::isnormal(v);
}

ScaledReal ScaledReal::operator-() const { return ScaledReal(-mantissa_, exponent_, true); }

ScaledReal ScaledReal::abs() const { return ScaledReal(std::abs(mantissa_), exponent_, true); }

ScaledReal operator+(const ScaledReal& a, const ScaledReal& b) {
  if (a.mantissa_ == 0.0) return b;
  if (b.mantissa_ == 0.0) return a;
  const ScaledReal& big = a.exponent_ >= b.exponent_ ? a : b;
  const ScaledReal& small = a.exponent_ >= b.exponent_ ? b : a;
  const std::int64_t gap = big.exponent_ - small.exponent_;
  if (gap > kNegligibleGap) return big;
  const double sum = big.mantissa_ + std::ldexp(small.mantissa_, -static_cast<int>(gap));
  return ScaledReal::normalized(sum, big.exponent_);
}

ScaledReal operator-(const ScaledReal& a, const ScaledReal& b) { return a + (-b); }

ScaledReal operator*(const ScaledReal& a, const ScaledReal& b) {
  if (a.mantissa_ == 0.0 || b.mantissa_ == 0.0) return {};
  return ScaledReal::normalized(a.mantissa_ * b.mantissa_, a.exponent_ + b.exponent_);
}

ScaledReal operator/(const ScaledReal& a, const ScaledReal& b) {
  if (b.mantissa_ == 0.0) throw NumericOverflow("division by zero in scaled arithmetic");
  if (a.mantissa_ == 0.0) return {};
  return ScaledReal::normalized(a.mantissa_ / b.mantissa_, a.exponent_ - b.exponent_);
}

bool operator<(const ScaledReal& a, const ScaledReal& b) {
  const int sa = a.sign();
  const int sb = b.sign();
  if (sa != sb) return sa < sb;
  if (sa == 0) return false;
  const bool a_mag_less = a.exponent_ != b.exponent_
                              ? a.exponent_ < b.exponent_
                              : std::abs(a.mantissa_) < std::abs(b.mantissa_);
  const bool a_mag_greater = a.exponent_ != b.exponent_
                                 ? a.exponent_ > b.exponent_
                                 : std::abs(a.mantissa_) > std::abs(b.mantissa_);
  return sa > 0 ? a_mag_less : a_mag_greater;
}

std::string ScaledReal::to_string(int precision) const {
  char buf[64];
  if (representable()) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, to_double());
  } else {
    std::snprintf(buf, sizeof buf, "%ce^%.*g", sign() < 0 ? '-' : '+', precision, log_magnitude());
  }
  return buf;
}

double log_distance(const ScaledReal& a, const ScaledReal& b) {
  if (a.is_zero() && b.is_zero()) return 0.0;
  if (a.sign() != b.sign()) return std::numeric_limits<double>::infinity();
  const ScaledReal ratio = a / b;
  return std::abs(std::log(ratio.mantissa()) + static_cast<double>(ratio.exponent()) * kLn2);
}

void ScaledSum::rescale(std::int64_t new_exponent) {
  if (exponent_ == std::numeric_limits<std::int64_t>::min()) {
    exponent_ = new_exponent;
    return;
  }
  const std::int64_t gap = new_exponent - exponent_;
  if (gap > kNegligibleGap) {
    sum_ = 0.0;
    compensation_ = 0.0;
  } else {
    sum_ = std::ldexp(sum_, -static_cast<int>(gap));
    compensation_ = std::ldexp(compensation_, -static_cast<int>(gap));
  }
  exponent_ = new_exponent;
}

void ScaledSum::add(const ScaledReal& x) {
  if (x.is_zero()) return;
  // The scale tracks the largest term seen, so every rescaled term is <= 1.
  if (x.exponent() > exponent_) rescale(x.exponent());
  const std::int64_t gap = exponent_ - x.exponent();
  if (gap > kNegligibleGap) return;
  const double term = std::ldexp(x.mantissa(), -static_cast<int>(gap));
  const double t = sum_ + term;
  if (std::abs(sum_) >= std::abs(term)) {
    compensation_ += (sum_ - t) + term;
  } else {
    compensation_ += (term - t) + sum_;
  }
  sum_ = t;
}

ScaledReal ScaledSum::value() const {
  if (exponent_ == std::numeric_limits<std::int64_t>::min()) return {};
  return ScaledReal::from_parts(sum_ + compensation_, exponent_);
}

void ScaledSum::clear() {
  sum_ = 0.0;
  compensation_ = 0.0;
  exponent_ = std::numeric_limits<std::int64_t>::min();
}

ScaledReal scaled_dot(std::span<const double> a, std::span<const ScaledReal> b) {
  ScaledSum acc;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t k = 0; k < n; ++k) {
    if (a[k] != 0.0) acc.add(ScaledReal(a[k]) * b[k]);
  }
  return acc.value();
}

}  // namespace sbp
