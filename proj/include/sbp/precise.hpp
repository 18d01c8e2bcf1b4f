#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sbp/model.hpp"
#include "sbp/scaled_real.hpp"
#include "sbp/sequences.hpp"

namespace sbp {

/// IEEE binary128.  The criteria subtract quantities of size sum F~ to get
/// answers of size 1, so they run the recursions at 113-bit precision.
using Quad = __float128;

inline constexpr double kQuadEpsilon = 1.925929944387235853055977942584927e-34;

inline bool quad_finite(Quad x) { return x == x && x - x == 0; }
inline Quad quad_abs(Quad x) { return x < 0 ? -x : x; }
inline double to_double(Quad x) { return static_cast<double>(x); }
/// Exact for every finite value, including those beyond double range.
ScaledReal to_scaled(Quad x);

/// F~_n^(i), m~_n, d~_n and the general recursion in binary128.  Row prefix
/// sums are accumulated on the fly from the sparse down-rate lists.
class PreciseSequences {
 public:
  /// Throws HorizonExceeded if row N is missing and NumericOverflow if a
  /// value leaves the binary128 range.
  PreciseSequences(const SingleBirthModel& model, const Coefficients& c, std::size_t N);

  std::size_t last() const { return up_.size() - 1; }
  const SingleBirthModel& model() const { return model_; }
  double up(std::size_t n) const { return up_.at(n); }
  double c(std::size_t n) const { return c_.at(n); }

  const std::vector<Quad>& f0() const { return f0_; }
  const std::vector<Quad>& m() const { return m_; }
  const std::vector<Quad>& d() const { return d_; }

  /// h_n = (source_n + sum_{k=start}^{n-1} q~_n^(k) h_k) / q_{n,n+1}, n = start..N;
  /// entries below `start` are zero.  `source` needs N+1 entries.
  std::vector<Quad> recursion(std::size_t start, std::span<const Quad> source) const;
  /// F~_n^(i) for n = i..N, indexed by n - i.
  std::vector<Quad> column(std::size_t i) const;

 private:
  void check(std::span<const Quad> values, const char* what) const;

  SingleBirthModel model_;
  std::vector<double> up_, c_;
  std::vector<std::vector<DownRate>> down_;
  std::vector<Quad> f0_, m_, d_;
};

}  // namespace sbp
