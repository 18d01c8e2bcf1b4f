#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sbp {

/// One downward transition i -> to with the given rate.
struct DownRate {
  std::size_t to = 0;
  double rate = 0.0;

  friend bool operator==(const DownRate&, const DownRate&) = default;
};

/// Row i of a single birth Q-matrix: the birth rate q_{i,i+1} plus the
/// sparse downward rates q_{ij}, j < i.  The diagonal is implied
/// (conservative), so q_i = up + sum(down).
class RateRow {
 public:
  RateRow() = default;
  /// Throws StructureError on a nonpositive birth rate, a negative or
  /// non-finite rate, or a repeated target.  Zero down rates are dropped.
  RateRow(double up, std::vector<DownRate> down);
  RateRow(double up, const std::map<std::size_t, double>& down);

  double up() const { return up_; }
  /// Sorted by target state.
  std::span<const DownRate> down() const { return down_; }
  double down_total() const { return down_total_; }
  /// q_i = -q_ii.
  double total() const { return up_ + down_total_; }
  double rate_to(std::size_t j) const;
  /// Largest downward target, or nullopt if the row has no down rates.
  std::optional<std::size_t> max_target() const;
  std::optional<std::size_t> min_target() const;

  friend bool operator==(const RateRow&, const RateRow&) = default;

 private:
  double up_ = 0.0;
  std::vector<DownRate> down_;
  double down_total_ = 0.0;
};

using RowFunction = std::function<RateRow(std::size_t)>;
using RateFunction = std::function<double(std::size_t)>;

/// Result of the finite-prefix communication check.
struct IrreducibilityReport {
  std::size_t checked_rows = 0;
  bool irreducible_on_horizon = true;
  /// Smallest state that cannot reach 0 using rows below the checked horizon.
  std::optional<std::size_t> first_stuck_state;
  std::string note;
};

/// Conservative single birth Q-matrix on {0, 1, 2, ...}.
///
/// Either tabulated (a fixed list of rows, horizon = number of rows) or
/// generated from a row function with an optional declared horizon.  Generated
/// rows are memoized on first access; memoization is internally synchronized,
/// so a model may be shared by concurrent readers.  Models are cheap handles:
/// copies share the same row storage.
class SingleBirthModel {
 public:
  /// Throws StructureError if any row targets j >= i or the list is empty.
  static SingleBirthModel tabulated(std::vector<RateRow> rows, std::string description = "tabulated");
  static SingleBirthModel generated(RowFunction rows, std::optional<std::size_t> declared_horizon,
                                    std::string description);

  /// Row i.  Throws HorizonExceeded past the horizon.
  const RateRow& row(std::size_t i) const;
  double up(std::size_t i) const { return row(i).up(); }
  double total_rate(std::size_t i) const { return row(i).total(); }
  double rate(std::size_t i, std::size_t j) const;

  /// Number of rows available; nullopt for an unbounded generated model.
  std::optional<std::size_t> horizon() const;
  bool is_tabulated() const;
  const std::string& description() const;

  /// Throws HorizonExceeded unless rows 0..last are available.
  void require_rows_through(std::size_t last) const;

  /// Materialize rows 0..count-1 as a tabulated model.
  SingleBirthModel tabulate(std::size_t count) const;

  /// Checks that every state below `rows` communicates back to 0 using only
  /// rows inside the prefix.  A warning, not an error: the property cannot be
  /// decided from a finite prefix.
  IrreducibilityReport check_irreducibility(std::size_t rows) const;

 private:
  struct Impl;
  explicit SingleBirthModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// Uniform catastrophes: q_{01} = q01, q_{i,i+1} = b*i and q_{ij} = a for j < i (i >= 1).
SingleBirthModel model_uniform_catastrophe(double a, double b, double q01);

/// Catastrophes to 0 only: row i has only q_{i0} (i >= 1) and q_{i,i+1}.
SingleBirthModel model_constant_column(RateFunction q_i0, RateFunction up,
                                       std::string description = "constant_column");

/// Birth-death chain: q_{i,i+1} = up(i), q_{i,i-1} = down(i) for i >= 1.
SingleBirthModel model_birth_death(RateFunction up, RateFunction down,
                                   std::string description = "birth_death");

/// Rows 0..N of a finite single death Q-matrix plus a killing vector c.
///
/// Row i >= 1 has exactly one downward rate q_{i,i-1} > 0; upward rates
/// q_{ij}, j > i, are arbitrary nonnegative.
class SingleDeathModel {
 public:
  struct Row {
    double down = 0.0;                          // q_{i,i-1}; ignored for i = 0
    std::map<std::size_t, double> up;           // j > i -> q_{ij}
  };

  /// Throws StructureError on a nonpositive death rate, negative rates, or
  /// an upward entry outside (i, N].
  SingleDeathModel(std::vector<Row> rows, std::vector<double> c);

  std::size_t size() const { return rows_.size(); }
  std::size_t last() const { return rows_.size() - 1; }
  double down(std::size_t i) const { return rows_.at(i).down; }
  double rate(std::size_t i, std::size_t j) const;
  double killing(std::size_t i) const { return c_.at(i); }
  std::span<const double> c() const { return c_; }
  const Row& row(std::size_t i) const { return rows_.at(i); }

 private:
  std::vector<Row> rows_;
  std::vector<double> c_;
};

}  // namespace sbp
