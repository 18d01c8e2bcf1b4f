#include "sbp/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sbp/errors.hpp"

namespace sbp {

Coefficients Coefficients::zero() { return {}; }

Coefficients Coefficients::constant(double value) {
  if (!std::isfinite(value)) throw DomainError("coefficient must be finite");
  if (value == 0.0) return zero();
  Coefficients c;
  c.kind_ = Kind::Constant;
  c.constant_ = value;
  char buf[64];
  std::snprintf(buf, sizeof buf, "constant(%.17g)", value);
  c.label_ = buf;
  return c;
}

Coefficients Coefficients::values(std::vector<double> entries) {
  for (double v : entries) {
    if (!std::isfinite(v)) throw DomainError("coefficient must be finite");
  }
  Coefficients c;
  c.kind_ = Kind::Values;
  c.values_ = std::move(entries);
  c.label_ = "values";
  return c;
}

Coefficients Coefficients::function(std::function<double(std::size_t)> fn, std::string label) {
  if (!fn) throw DomainError("coefficient function is empty");
  Coefficients c;
  c.kind_ = Kind::Function;
  c.fn_ = std::move(fn);
  c.label_ = std::move(label);
  return c;
}

double Coefficients::at(std::size_t i) const {
  double v = 0.0;
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Constant: return constant_;
    case Kind::Values:
      if (i >= values_.size()) {
        throw DomainError("coefficient vector has " + std::to_string(values_.size()) +
                          " entries, index " + std::to_string(i) + " requested");
      }
      return values_[i];
    case Kind::Function: v = fn_(i); break;
  }
  if (!std::isfinite(v)) throw DomainError("coefficient at " + std::to_string(i) + " is not finite");
  return v;
}

std::optional<double> Coefficients::constant_value() const {
  if (kind_ == Kind::Zero) return 0.0;
  if (kind_ == Kind::Constant) return constant_;
  return std::nullopt;
}

std::vector<double> partial_row_sums(const SingleBirthModel& model, std::size_t n) {
  const RateRow& row = model.row(n);
  std::vector<double> out(n, 0.0);
  double running = 0.0;
  auto it = row.down().begin();
  for (std::size_t k = 0; k < n; ++k) {
    while (it != row.down().end() && it->to <= k) running += (it++)->rate;
    out[k] = running;
  }
  return out;
}

SequenceTable::SequenceTable(const SingleBirthModel& model, Coefficients c, std::size_t N, SequenceOptions opts)
    : model_(model), c_(std::move(c)) {
  model_.require_rows_through(N);
  rows_.up.resize(N + 1);
  rows_.c.resize(N + 1);
  rows_.partial.resize(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    rows_.up[n] = model_.up(n);
    rows_.c[n] = c_.at(n);
    rows_.partial[n] = partial_row_sums(model_, n);
  }

  if (opts.full_triangle) {
    triangle_ = kernels::f_triangle(rows_, opts.execution);
    f0_ = triangle_[0];
  } else {
    f0_ = kernels::f_column(rows_, 0);
  }

  std::vector<ScaledReal> ones(N + 1, ScaledReal(1.0));
  m_ = recursion(0, ones);
  ones[0] = ScaledReal{};
  d_ = recursion(0, ones);
}

std::vector<ScaledReal> SequenceTable::column(std::size_t i) const {
  if (i > last()) throw HorizonExceeded("column " + std::to_string(i) + " beyond truncation");
  if (i == 0) return f0_;
  if (has_triangle()) return triangle_[i];
  return kernels::f_column(rows_, i);
}

ScaledReal SequenceTable::f(std::size_t n, std::size_t i) const {
  if (i > n || n > last()) throw HorizonExceeded("F index out of range");
  if (i == 0) return f0_[n];
  if (!has_triangle()) throw UsageError("F~^(i) for i > 0 needs a table built with full_triangle");
  return triangle_[i][n - i];
}

std::vector<ScaledReal> SequenceTable::recursion(std::size_t start, std::span<const ScaledReal> source) const {
  std::vector<ScaledReal> out(last() + 1);
  kernels::tilted_recursion(rows_, start, source, out);
  return out;
}

double SequenceTable::identity_defect() const {
  const ScaledReal q01(rows_.up[0]);
  double worst = 0.0;
  for (std::size_t n = 0; n <= last(); ++n) {
    const ScaledReal a = f0_[n] / q01;
    const ScaledReal diff = m_[n] - a - d_[n];
    const ScaledReal scale = std::max({m_[n].abs(), a.abs(), d_[n].abs()});
    if (scale.is_zero()) continue;
    worst = std::max(worst, (diff.abs() / scale).to_double());
  }
  return worst;
}

}  // namespace sbp
