#include "sbp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sbp/errors.hpp"

namespace sbp {

// ---- Philox ----

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
constexpr double kTwoPow53 = 9007199254740992.0;

void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Philox4x32(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

Philox4x32::Block Philox4x32::encrypt(Block c, Key k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

std::uint32_t Philox4x32::next_u32() {
  if (used_ == 4) {
    buffer_ = encrypt({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                       static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                      key_);
    ++counter_;
    used_ = 0;
  }
  return buffer_[used_++];
}

double Philox4x32::uniform() {
  const std::uint64_t hi = next_u32();
  const std::uint64_t x = (hi << 32) | next_u32();
  return static_cast<double>(x >> 11) / kTwoPow53;
}

double Philox4x32::uniform_open0() {
  const std::uint64_t hi = next_u32();
  const std::uint64_t x = (hi << 32) | next_u32();
  return static_cast<double>((x >> 11) + 1) / kTwoPow53;
}

const char* to_string(Terminal t) {
  switch (t) {
    case Terminal::HitTarget: return "HitTarget";
    case Terminal::HorizonCapped: return "HorizonCapped";
    case Terminal::LevelCapped: return "LevelCapped";
  }
  return "?";
}

// ---- jump chain ----

namespace {

constexpr std::size_t kAliasThreshold = 8;

}  // namespace

JumpSampler::JumpSampler(const SingleBirthModel& model) : model_(model) {
  if (const auto h = model.horizon()) last_ = *h - 1;
}

double JumpSampler::total_rate(std::size_t i) {
  const RateRow& r = row(i);
  return i == last_ ? r.down_total() : r.total();
}

const RateRow& JumpSampler::row(std::size_t i) {
  if (i >= rows_.size()) rows_.resize(i + 1, nullptr);
  if (!rows_[i]) rows_[i] = &model_.row(i);
  return *rows_[i];
}

const JumpSampler::Alias& JumpSampler::alias_for(std::size_t i) {
  auto it = tables_.find(i);
  if (it != tables_.end()) return it->second;
  const auto down = row(i).down();
  const std::size_t k = down.size();
  Alias a;
  a.prob.assign(k, 0.0);
  a.alias.assign(k, 0);
  double total = 0.0;
  for (const auto& d : down) total += d.rate;
  std::vector<double> scaled(k);
  std::vector<std::uint32_t> small, large;
  for (std::size_t j = 0; j < k; ++j) {
    scaled[j] = down[j].rate * static_cast<double>(k) / total;
    (scaled[j] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(j));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back(), l = large.back();
    small.pop_back();
    a.prob[s] = scaled[s];
    a.alias[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto j : large) a.prob[j] = 1.0;
  for (auto j : small) a.prob[j] = 1.0;
  return tables_.emplace(i, std::move(a)).first->second;
}

std::size_t JumpSampler::next_state(std::size_t i, Philox4x32& rng) {
  const RateRow& r = row(i);
  const double up = i == last_ ? 0.0 : r.up();
  const double u = rng.uniform() * (up + r.down_total());
  if (u < up || r.down().empty()) return i + 1;
  const auto down = r.down();
  if (down.size() <= kAliasThreshold) {
    double acc = up;
    for (const auto& d : down) {
      acc += d.rate;
      if (u < acc) return d.to;
    }
    return down.back().to;
  }
  const Alias& a = alias_for(i);
  const double v = rng.uniform() * static_cast<double>(down.size());
  const auto j = std::min(static_cast<std::size_t>(v), down.size() - 1);
  return (v - static_cast<double>(j) < a.prob[j]) ? down[j].to : down[a.alias[j]].to;
}

double JumpSampler::holding_time(std::size_t i, Philox4x32& rng) {
  return -std::log(rng.uniform_open0()) / total_rate(i);
}

// ---- paths ----

namespace {

struct Walk {
  std::optional<std::size_t> target;
  bool return_rule = false;
  double horizon = std::numeric_limits<double>::infinity();
  std::size_t level = 0;
};

Walk compile(const StopRule& stop, const Caps& caps) {
  Walk w;
  w.level = caps.level;
  if (const auto* r = std::get_if<FirstReturnTo>(&stop)) {
    w.target = r->state;
    w.return_rule = true;
  } else if (const auto* h = std::get_if<FirstHit>(&stop)) {
    w.target = h->state;
  } else if (const auto* t = std::get_if<TimeHorizon>(&stop)) {
    if (!(t->T >= 0.0)) throw UsageError("time horizon must be nonnegative");
    w.horizon = t->T;
  } else if (const auto* l = std::get_if<LevelCap>(&stop)) {
    w.level = std::min(w.level, l->level);
  }
  if (caps.time) {
    if (!(*caps.time > 0.0)) throw UsageError("time cap must be positive");
    w.horizon = std::min(w.horizon, *caps.time);
  }
  return w;
}

template <class Record>
PathOutcome walk(JumpSampler& sampler, std::size_t start, const Walk& w,
                 const Caps& caps, Philox4x32& rng, Record&& record) {
  PathOutcome out;
  out.level = start;
  if (w.target && !w.return_rule && start == *w.target) {
    out.terminal = Terminal::HitTarget;
    return out;
  }
  if (start >= w.level) {
    out.terminal = Terminal::LevelCapped;
    return out;
  }
  std::size_t state = start;
  double t = 0.0;
  double min_rate = std::numeric_limits<double>::infinity();
  const bool default_cap = !caps.time;
  for (;;) {
    min_rate = std::min(min_rate, sampler.total_rate(state));
    const double cap = default_cap ? std::min(w.horizon, 1e6 / min_rate) : w.horizon;
    if (min_rate == 0.0 && !std::isfinite(cap)) {
      // Absorbed with no horizon to stop at.
      out.terminal = Terminal::HorizonCapped;
      out.time = cap;
      break;
    }
    const double hold = sampler.holding_time(state, rng);
    if (t + hold > cap) {
      out.terminal = Terminal::HorizonCapped;
      out.time = cap;
      break;
    }
    t += hold;
    state = sampler.next_state(state, rng);
    ++out.jumps;
    record(state, t);
    out.level = state;
    out.time = t;
    if (w.target && state == *w.target) {
      out.terminal = Terminal::HitTarget;
      break;
    }
    if (state >= w.level) {
      out.terminal = Terminal::LevelCapped;
      break;
    }
    if (out.jumps >= caps.max_jumps) {
      out.terminal = Terminal::HorizonCapped;
      break;
    }
  }
  return out;
}

}  // namespace

Trajectory simulate(const SingleBirthModel& model, std::size_t start, const StopRule& stop, std::uint64_t seed,
                    const Caps& caps, std::uint64_t stream) {
  const Walk w = compile(stop, caps);
  JumpSampler sampler(model);
  Philox4x32 rng(seed, stream);
  Trajectory tr;
  tr.states.push_back(start);
  const auto out = walk(sampler, start, w, caps, rng, [&](std::size_t s, double t) {
    tr.states.push_back(s);
    tr.jump_times.push_back(t);
  });
  tr.terminal = out.terminal;
  tr.time = out.time;
  tr.level = out.level;
  return tr;
}

std::vector<PathOutcome> simulate_batch(const SingleBirthModel& model, std::size_t start, const StopRule& stop,
                                        std::size_t samples, std::uint64_t seed, const Caps& caps,
                                        Execution execution) {
  const Walk w = compile(stop, caps);
  std::vector<PathOutcome> out(samples);
  auto none = [](std::size_t, double) {};
  if (execution == Execution::Serial) {
    JumpSampler sampler(model);
    for (std::size_t k = 0; k < samples; ++k) {
      Philox4x32 rng(seed, k);
      out[k] = walk(sampler, start, w, caps, rng, none);
    }
    return out;
  }
  const auto n = static_cast<std::ptrdiff_t>(samples);
#pragma omp parallel
  {
    JumpSampler sampler(model);
#pragma omp for schedule(dynamic, 256)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      Philox4x32 rng(seed, static_cast<std::uint64_t>(k));
      out[static_cast<std::size_t>(k)] = walk(sampler, start, w, caps, rng, none);
    }
  }
  return out;
}

// ---- estimators ----

namespace {

void require_samples(std::size_t samples) {
  if (samples == 0) throw UsageError("samples must be positive");
}

// Mean and standard error of the values; capped paths are counted separately.
EstimateWithError summarize(const std::vector<double>& values, std::size_t total) {
  EstimateWithError e;
  e.samples = values.size();
  e.capped = total - values.size();
  e.capped_fraction = total ? static_cast<double>(e.capped) / static_cast<double>(total) : 0.0;
  e.bias_warning = e.capped > 0;
  if (values.empty()) return e;
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double x : values) {  // Welford
    ++k;
    const double delta = x - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (x - mean);
  }
  e.mean = mean;
  const double var = values.size() > 1 ? m2 / static_cast<double>(values.size() - 1) : 0.0;
  e.std_error = std::sqrt(var / static_cast<double>(values.size()));
  return e;
}

}  // namespace

EstimateWithError estimate_return_time_moment(const SingleBirthModel& model, std::size_t n, int ell,
                                              const EstimateOptions& opts, std::size_t target) {
  require_samples(opts.samples);
  if (ell < 1) throw UsageError("moment order must be at least 1");
  const auto paths =
      simulate_batch(model, n, FirstReturnTo{target}, opts.samples, opts.seed, opts.caps, opts.execution);
  std::vector<double> values;
  for (const auto& p : paths) {
    if (p.terminal == Terminal::HitTarget) values.push_back(std::pow(p.time, ell));
  }
  if (values.empty()) throw AllCapped("every path hit a cap before returning to " + std::to_string(target));
  return summarize(values, paths.size());
}

EstimateWithError estimate_transform(const SingleBirthModel& model, std::size_t n, double lambda, TransformOf of,
                                     const EstimateOptions& opts) {
  require_samples(opts.samples);
  if (!std::isfinite(lambda)) throw UsageError("lambda must be finite");
  Caps caps = opts.caps;
  if (lambda > 0.0) {
    if (!caps.time) caps.time = 700.0 / lambda;
    if (lambda * *caps.time > 700.0) throw UsageError("time cap too large: exp(lambda * cap) overflows");
  }
  const Terminal wanted = of == TransformOf::ReturnTime ? Terminal::HitTarget : Terminal::LevelCapped;
  const StopRule stop = of == TransformOf::ReturnTime ? StopRule{FirstReturnTo{0}} : StopRule{LevelCap{caps.level}};
  const auto paths = simulate_batch(model, n, stop, opts.samples, opts.seed, caps, opts.execution);

  std::vector<double> values;
  double low = 0.0, high = 0.0;
  for (const auto& p : paths) {
    if (p.terminal == wanted) {
      const double v = std::exp(lambda * p.time);
      values.push_back(v);
      low += v;
      high += v;
    } else {
      // The true time exceeds the cap time.
      const double at_cap = std::exp(lambda * p.time);
      if (lambda < 0.0) {
        high += at_cap;
      } else if (lambda > 0.0) {
        low += at_cap;
        high = std::numeric_limits<double>::infinity();
      } else {
        low += 1.0;
        high += 1.0;
      }
    }
  }
  if (values.empty()) throw AllCapped("every path hit a cap before the stopping event");
  auto e = summarize(values, paths.size());
  const double total = static_cast<double>(paths.size());
  e.bracket_low = low / total;
  e.bracket_high = high / total;
  return e;
}

EstimateWithError estimate_return_probability(const SingleBirthModel& model, std::size_t n,
                                              const EstimateOptions& opts, std::size_t target) {
  require_samples(opts.samples);
  const auto paths =
      simulate_batch(model, n, FirstReturnTo{target}, opts.samples, opts.seed, opts.caps, opts.execution);
  std::vector<double> hits;
  std::size_t capped = 0;
  for (const auto& p : paths) {
    const bool hit = p.terminal == Terminal::HitTarget;
    hits.push_back(hit ? 1.0 : 0.0);
    if (!hit) ++capped;
  }
  auto e = summarize(hits, paths.size());
  e.capped = capped;
  e.capped_fraction = static_cast<double>(capped) / static_cast<double>(paths.size());
  e.bias_warning = capped > 0;
  e.bracket_low = e.mean;
  e.bracket_high = e.mean + e.capped_fraction;
  return e;
}

EstimateWithError estimate_state_at(const SingleBirthModel& model, std::size_t n, double T,
                                    const EstimateOptions& opts) {
  require_samples(opts.samples);
  const auto paths = simulate_batch(model, n, TimeHorizon{T}, opts.samples, opts.seed, opts.caps, opts.execution);
  std::vector<double> values;
  for (const auto& p : paths) {
    if (p.terminal == Terminal::HorizonCapped && p.time == T) values.push_back(static_cast<double>(p.level));
  }
  if (values.empty()) throw AllCapped("every path hit a cap before time " + std::to_string(T));
  return summarize(values, paths.size());
}

}  // namespace sbp
