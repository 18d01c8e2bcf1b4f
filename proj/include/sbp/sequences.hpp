#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sbp/kernels.hpp"
#include "sbp/model.hpp"
#include "sbp/scaled_real.hpp"

namespace sbp {

/// The diagonal perturbation c_i of Omega = Q + c.  c <= 0 is killing.
class Coefficients {
 public:
  static Coefficients zero();
  static Coefficients constant(double value);
  /// Explicit entries; indexing past the end throws DomainError.
  static Coefficients values(std::vector<double> entries);
  static Coefficients function(std::function<double(std::size_t)> fn, std::string label);

  /// Throws DomainError on a non-finite entry.
  double at(std::size_t i) const;
  bool is_zero() const { return kind_ == Kind::Zero; }
  std::optional<double> constant_value() const;
  const std::string& label() const { return label_; }

 private:
  enum class Kind { Zero, Constant, Values, Function };
  Kind kind_ = Kind::Zero;
  double constant_ = 0.0;
  std::vector<double> values_;
  std::function<double(std::size_t)> fn_;
  std::string label_ = "zero";
};

/// q_n^(k) = sum_{j<=k} q_nj for k = 0..n-1.
std::vector<double> partial_row_sums(const SingleBirthModel& model, std::size_t n);

struct SequenceOptions {
  /// Also build every column F~^(i), not just column 0.
  bool full_triangle = false;
  Execution execution = Execution::Parallel;
};

/// F~_n^(k), m~_n and d~_n for 0 <= k <= n <= N under a given c-vector.
///
/// Immutable once built.  Column 0 is always present; other columns come
/// from the full triangle when requested, otherwise they are computed on demand.
class SequenceTable {
 public:
  /// Throws HorizonExceeded if row N is not available.
  SequenceTable(const SingleBirthModel& model, Coefficients c, std::size_t N, SequenceOptions opts = {});

  std::size_t last() const { return rows_.last(); }
  const SingleBirthModel& model() const { return model_; }
  const Coefficients& coefficients() const { return c_; }
  const TiltedRows& rows() const { return rows_; }

  double up(std::size_t n) const { return rows_.up.at(n); }
  double c(std::size_t n) const { return rows_.c.at(n); }
  /// q~_n^(k) for k < n.
  double tilted(std::size_t n, std::size_t k) const { return rows_.tilted(n, k); }
  std::span<const double> partial(std::size_t n) const { return rows_.partial.at(n); }

  /// F~_n^(0), n = 0..N.
  const std::vector<ScaledReal>& f0() const { return f0_; }
  const std::vector<ScaledReal>& m() const { return m_; }
  const std::vector<ScaledReal>& d() const { return d_; }

  bool has_triangle() const { return !triangle_.empty(); }
  /// F~_n^(i) for n = i..N, indexed by n - i.
  std::vector<ScaledReal> column(std::size_t i) const;
  /// F~_n^(i); needs the full triangle unless i = 0.
  ScaledReal f(std::size_t n, std::size_t i) const;

  /// h_n = (source_n + sum_{k=start}^{n-1} q~_n^(k) h_k) / q_{n,n+1}, n = start..N.
  /// Equals sum_{j=start}^{n} F~_n^(j) source_j / q_{j,j+1}.  `source` is
  /// indexed by state and needs N+1 entries.
  std::vector<ScaledReal> recursion(std::size_t start, std::span<const ScaledReal> source) const;

  /// max_n |m~_n - F~_n^(0)/q01 - d~_n| / max(|m~_n|, |F~_n^(0)/q01|, |d~_n|).
  double identity_defect() const;

 private:
  SingleBirthModel model_;
  Coefficients c_;
  TiltedRows rows_;
  std::vector<ScaledReal> f0_, m_, d_;
  TriangleColumns triangle_;
};

}  // namespace sbp
