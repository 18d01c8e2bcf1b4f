#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <variant>
#include <vector>

#include "sbp/kernels.hpp"
#include "sbp/model.hpp"

namespace sbp {

/// Philox4x32-10 counter-based generator.  A stream is fixed by a 64-bit key
/// (the seed) and a 64-bit stream id; draws walk the low half of the counter.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream);

  /// The raw bijection.
  static Block encrypt(Block counter, Key key);

  std::uint32_t next_u32();
  /// Uniform on (0, 1], 53 random bits.
  double uniform_open0();
  /// Uniform on [0, 1).
  double uniform();

 private:
  Key key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  Block buffer_{};
  int used_ = 4;
};

struct FirstReturnTo {
  std::size_t state;
};
/// tau: zero when the path starts at the state.
struct FirstHit {
  std::size_t state;
};
struct TimeHorizon {
  double T;
};
struct LevelCap {
  std::size_t level;
};
using StopRule = std::variant<FirstReturnTo, FirstHit, TimeHorizon, LevelCap>;

/// Safety caps applied on top of any stop rule.
struct Caps {
  /// Absolute time cap; default 1e6 / min q_i over the states visited so far.
  std::optional<double> time;
  std::size_t level = 10000;
  std::size_t max_jumps = 10'000'000;
};

enum class Terminal { HitTarget, HorizonCapped, LevelCapped };
const char* to_string(Terminal t);

struct Trajectory {
  std::vector<std::size_t> states;
  /// jump_times[k] is the time of the jump into states[k + 1].
  std::vector<double> jump_times;
  Terminal terminal = Terminal::HorizonCapped;
  /// Stopping time (hit time, the horizon, or the time the level was reached).
  double time = 0.0;
  std::size_t level = 0;
};

/// One-step sampler for a single birth model.  Rows with more than eight down
/// rates use an alias table built on first use.  A tabulated model is sampled
/// as the chain on its rows with the birth out of the last row removed.  Not
/// thread safe: each worker owns one.
class JumpSampler {
 public:
  explicit JumpSampler(const SingleBirthModel& model);

  /// Next state from i according to q_ik / q_i.
  std::size_t next_state(std::size_t i, Philox4x32& rng);
  /// Exponential holding time with rate q_i.
  double holding_time(std::size_t i, Philox4x32& rng);
  /// q_i, without the birth rate on the last row of a tabulated model.
  double total_rate(std::size_t i);

 private:
  struct Alias {
    std::vector<double> prob;
    std::vector<std::uint32_t> alias;
  };
  const Alias& alias_for(std::size_t i);
  // Rows are cached locally to keep the model's lock off the sampling path.
  const RateRow& row(std::size_t i);

  SingleBirthModel model_;
  std::optional<std::size_t> last_;
  std::vector<const RateRow*> rows_;
  std::unordered_map<std::size_t, Alias> tables_;
};

/// A path of the minimal process from `start` until the stop rule or a cap.
/// Deterministic in (seed, stream).
Trajectory simulate(const SingleBirthModel& model, std::size_t start, const StopRule& stop, std::uint64_t seed,
                    const Caps& caps = {}, std::uint64_t stream = 0);

/// Outcome of one path without the recorded states.
struct PathOutcome {
  Terminal terminal = Terminal::HorizonCapped;
  double time = 0.0;
  std::size_t level = 0;
  std::size_t jumps = 0;
};

/// `samples` independent paths; path k uses stream k, so results do not depend
/// on the thread count or the execution mode.
std::vector<PathOutcome> simulate_batch(const SingleBirthModel& model, std::size_t start, const StopRule& stop,
                                        std::size_t samples, std::uint64_t seed, const Caps& caps = {},
                                        Execution execution = Execution::Parallel);

struct EstimateWithError {
  double mean = 0.0;
  double std_error = 0.0;
  /// Paths that entered the estimate.
  std::size_t samples = 0;
  std::size_t capped = 0;
  double capped_fraction = 0.0;
  bool bias_warning = false;
  /// Bounds for the mean over all paths, capped ones included at their extremes.
  std::optional<double> bracket_low;
  std::optional<double> bracket_high;
};

struct EstimateOptions {
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  Caps caps;
  Execution execution = Execution::Parallel;
};

/// E_n sigma_target^ell from uncapped paths.  Throws UsageError (samples = 0,
/// ell < 1), AllCapped.
EstimateWithError estimate_return_time_moment(const SingleBirthModel& model, std::size_t n, int ell,
                                              const EstimateOptions& opts = {}, std::size_t target = 0);

enum class TransformOf { ReturnTime, Lifetime };

/// E_n exp(lambda T), T = sigma_0 or the life time (time to reach caps.level).
/// For lambda > 0 without an explicit time cap, the cap is 700 / lambda.
/// Throws UsageError, AllCapped.
EstimateWithError estimate_transform(const SingleBirthModel& model, std::size_t n, double lambda, TransformOf of,
                                     const EstimateOptions& opts = {});

/// P_n(sigma_target < infinity): fraction of paths that hit before a cap,
/// bracketed by counting capped paths as misses or hits.
EstimateWithError estimate_return_probability(const SingleBirthModel& model, std::size_t n,
                                              const EstimateOptions& opts = {}, std::size_t target = 0);

/// E_n X_T, the state at time T.  Paths stopped early by a cap are excluded
/// and counted.  Throws UsageError, AllCapped.
EstimateWithError estimate_state_at(const SingleBirthModel& model, std::size_t n, double T,
                                    const EstimateOptions& opts = {});

}  // namespace sbp
