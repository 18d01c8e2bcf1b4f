#include "sbp/precise.hpp"

#include <string>

#include "sbp/errors.hpp"

namespace sbp {

ScaledReal to_scaled(Quad x) {
  if (x == 0) return ScaledReal{};
  if (!quad_finite(x)) throw NumericOverflow("non-finite binary128 value");
  // Scale by exact powers of two until the value fits a double.
  constexpr Quad kStep = static_cast<Quad>(1ULL << 62) * static_cast<Quad>(1ULL << 62) *
                         static_cast<Quad>(1ULL << 62) * static_cast<Quad>(1ULL << 62);  // 2^248
  std::int64_t exponent = 0;
  Quad m = x;
  while (quad_abs(m) > 1e300) {
    m /= kStep;
    exponent += 248;
  }
  while (quad_abs(m) < 1e-300) {
    m *= kStep;
    exponent -= 248;
  }
  return ScaledReal::from_parts(static_cast<double>(m), exponent);
}

PreciseSequences::PreciseSequences(const SingleBirthModel& model, const Coefficients& c, std::size_t N)
    : model_(model) {
  model_.require_rows_through(N);
  up_.resize(N + 1);
  c_.resize(N + 1);
  down_.resize(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    const RateRow& row = model_.row(n);
    up_[n] = row.up();
    c_[n] = c.at(n);
    down_[n].assign(row.down().begin(), row.down().end());
  }
  f0_ = column(0);
  std::vector<Quad> ones(N + 1, 1);
  m_ = recursion(0, ones);
  ones[0] = 0;
  d_ = recursion(0, ones);
}

void PreciseSequences::check(std::span<const Quad> values, const char* what) const {
  for (std::size_t n = 0; n < values.size(); ++n) {
    if (!quad_finite(values[n])) {
      throw NumericOverflow(std::string(what) + " leaves the binary128 range at n = " + std::to_string(n));
    }
  }
}

std::vector<Quad> PreciseSequences::recursion(std::size_t start, std::span<const Quad> source) const {
  const std::size_t N = last();
  if (source.size() < N + 1) throw UsageError("recursion source needs N+1 entries");
  std::vector<Quad> out(N + 1, 0);
  for (std::size_t n = start; n <= N; ++n) {
    Quad acc = source[n];
    Quad running = 0;
    auto it = down_[n].begin();
    const auto end = down_[n].end();
    while (it != end && it->to < start) running += (it++)->rate;
    const Quad cn = c_[n];
    for (std::size_t k = start; k < n; ++k) {
      while (it != end && it->to <= k) running += (it++)->rate;
      const Quad q = running - cn;
      if (q != 0 && out[k] != 0) acc += q * out[k];
    }
    out[n] = acc / up_[n];
  }
  check(out, "recursion");
  return out;
}

std::vector<Quad> PreciseSequences::column(std::size_t i) const {
  const std::size_t N = last();
  if (i > N) throw HorizonExceeded("column " + std::to_string(i) + " beyond truncation");
  std::vector<Quad> source(N + 1, 0);
  source[i] = up_[i];
  auto full = recursion(i, source);
  return {full.begin() + static_cast<std::ptrdiff_t>(i), full.end()};
}

}  // namespace sbp
