#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sbp/model.hpp"
#include "sbp/precise.hpp"
#include "sbp/sequences.hpp"

namespace sbp {

enum class Status { Holds, Fails, Inconclusive };
const char* to_string(Status s);

/// A finite real, +infinity, or a value the truncation could not settle.
struct ExtendedReal {
  enum class Kind { Finite, PosInf, Unknown };
  Kind kind = Kind::Unknown;
  double value = 0.0;  // meaningful for Finite; best guess for Unknown

  static ExtendedReal finite(double v) { return {Kind::Finite, v}; }
  static ExtendedReal infinity() { return {Kind::PosInf, 0.0}; }
  static ExtendedReal unknown(double guess = 0.0) { return {Kind::Unknown, guess}; }
  bool is_finite() const { return kind == Kind::Finite; }
  bool operator==(const ExtendedReal&) const = default;
};

struct CriteriaOptions {
  std::size_t N = 1000;
  /// Tail window for limits and series tests.
  std::size_t window = 50;
  double ratio_tolerance = 1e-8;
  double divergence_threshold = 1e12;
  double kummer_margin = 0.1;
  int max_order = 6;
  /// Entry n of a moment vector is resolved when its propagated uncertainty
  /// is at most this times max(1, |value|).
  double resolution_tolerance = 1e-8;
  bool operator==(const CriteriaOptions&) const = default;
};

struct Diagnostics {
  std::size_t truncation = 0;
  std::vector<double> last_partial_sums;
  std::vector<double> ratio_estimates;
  std::optional<double> kummer;
  std::vector<std::string> notes;
  bool operator==(const Diagnostics&) const = default;
};

struct Verdict {
  Status status = Status::Inconclusive;
  Diagnostics diagnostics;
  bool operator==(const Verdict&) const = default;
};

struct LimitEstimate {
  ExtendedReal value;
  std::vector<double> window_estimates;
  bool converged = false;
  double tolerance = 0.0;
  /// max - min over the window.
  double spread = 0.0;
  bool operator==(const LimitEstimate&) const = default;
};

struct MomentVector {
  std::string quantity;
  std::vector<ExtendedReal> values;
  std::vector<double> uncertainty;
  std::vector<bool> resolved;

  /// Number of leading entries that are resolved.
  std::size_t resolved_prefix() const;
  bool operator==(const MomentVector&) const = default;
};

// ---- series diagnostics ----

enum class SeriesConclusion { Converges, Diverges, Inconclusive };
const char* to_string(SeriesConclusion c);

struct KummerResult {
  LimitEstimate kappa;
  SeriesConclusion conclusion = SeriesConclusion::Inconclusive;
  /// kappa + 1; with v_n = n this is the Raabe ratio, > 1 for convergence.
  double raabe = 0.0;
  /// Smallest kappa_n over the window (used for the tail bound).
  double kappa_min = 0.0;
};

/// kappa_n = v_n u_n / u_{n+1} - v_{n+1} over the supplied windows (u, v > 0,
/// u has one more entry than the kappas produced).  Converges when every kappa_n
/// exceeds the margin, Diverges when every kappa_n is below -margin.
KummerResult kummer_test(std::span<const double> u, std::span<const double> v, double margin = 0.1,
                         double tolerance = 1e-8);

struct SeriesVerdict {
  SeriesConclusion conclusion = SeriesConclusion::Inconclusive;
  /// Sum of the supplied terms.
  double partial_sum = 0.0;
  /// Estimate and bound of the remainder past the last term (Converges only).
  double tail_estimate = 0.0;
  double tail_bound = 0.0;
  std::optional<KummerResult> kummer;
  Diagnostics diagnostics;
};

/// Convergence of sum_n terms[n] for nonnegative terms, with v_n = n in the
/// Kummer test over the last `window` terms.
SeriesVerdict classify_series(std::span<const Quad> terms, const CriteriaOptions& opts);

/// Windowed limsup of a sequence; converged when the window spread is within
/// tolerance * max(1, |value|).
LimitEstimate window_limit(std::span<const Quad> sequence, std::size_t window, double tolerance);

// ---- criteria ----

Verdict uniqueness(const SingleBirthModel& model, const CriteriaOptions& opts = {});
Verdict recurrence(const SingleBirthModel& model, const CriteriaOptions& opts = {});

/// P_n(sigma_0 < infinity), n = 0..N.  Throws InconclusiveSeries.
MomentVector return_probability(const SingleBirthModel& model, const CriteriaOptions& opts = {});

struct MeanReturnTime {
  LimitEstimate d;
  /// E_0 sigma_0 and E_n sigma_0 for n = 1..N.
  MomentVector E;
  Verdict recurrent;
  Verdict ergodic;
  Verdict strongly_ergodic;
  /// sup_n E_n sigma_0 over the resolved prefix.
  std::optional<double> sup;
};
MeanReturnTime mean_return_time(const SingleBirthModel& model, const CriteriaOptions& opts = {});

struct HittingMoment {
  ExtendedReal at_target;
  MomentVector E;
  /// The ratio whose limit gives the moment at the target, per order.
  std::vector<LimitEstimate> order_limits;
  /// Largest propagated uncertainty at the target, per order.
  std::vector<double> order_tolerances;
};
/// E_n sigma_{i0}^ell (E_n tau_{i0}^ell for n != i0).  Throws PreviousOrderInfinite,
/// InconclusiveSeries, UsageError (ell outside 1..max_order).
HittingMoment hitting_moment(const SingleBirthModel& model, std::size_t i0, int ell,
                             const CriteriaOptions& opts = {});

/// E_n tau_infinity^ell on an explosive model.  Throws NotExplosive,
/// PreviousOrderInfinite, InconclusiveSeries.
MomentVector lifetime_moment(const SingleBirthModel& model, int ell, const CriteriaOptions& opts = {});

struct ExpMoment {
  Verdict feasible;
  MomentVector E;
  LimitEstimate d_tilde;
};
/// E_n exp(lambda sigma_0).  Throws RateBoundViolated, ConditionViolated.
ExpMoment exp_moment_return(const SingleBirthModel& model, double lambda, const CriteriaOptions& opts = {});

/// E_n exp(-lambda sigma_0).  Throws InconclusiveSeries, DomainError on a transient model.
MomentVector laplace_return(const SingleBirthModel& model, double lambda, const CriteriaOptions& opts = {});

enum class TransformDirection { ExpMoment, Laplace };
/// E_n exp(+-lambda tau_infinity).  Throws NotExplosive, FeasibilityViolated, InconclusiveSeries.
MomentVector lifetime_transforms(const SingleBirthModel& model, double lambda, TransformDirection direction,
                                 const CriteriaOptions& opts = {});

struct DecayProfile {
  std::vector<double> g;
  /// First n with g_n of the opposite sign to g_0, or zero.
  std::optional<std::size_t> first_nonpositive;
};
/// Solution of Qg + lambda g = 0 started at g0.
DecayProfile decay_profile(const SingleBirthModel& model, double lambda, double g0, std::size_t N);

struct MzCondition {
  LimitEstimate M;
  Verdict sufficient;
  SeriesVerdict inner;
};
/// Throws DomainError on a transient model, InconclusiveSeries.
MzCondition mz_sufficient_condition(const SingleBirthModel& model, const CriteriaOptions& opts = {});

}  // namespace sbp
