#include "sbp/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "sbp/errors.hpp"

namespace sbp {

const char* to_string(Status s) {
  switch (s) {
    case Status::Holds: return "Holds";
    case Status::Fails: return "Fails";
    case Status::Inconclusive: return "Inconclusive";
  }
  return "?";
}

const char* to_string(SeriesConclusion c) {
  switch (c) {
    case SeriesConclusion::Converges: return "Converges";
    case SeriesConclusion::Diverges: return "Diverges";
    case SeriesConclusion::Inconclusive: return "Inconclusive";
  }
  return "?";
}

std::size_t MomentVector::resolved_prefix() const {
  std::size_t n = 0;
  while (n < resolved.size() && resolved[n]) ++n;
  return n;
}

namespace {

constexpr std::size_t kShownSums = 5;
constexpr std::size_t kMinWindow = 5;
constexpr double kGeometricRatio = 0.99;

std::string fmt(const char* format, double x) {
  char buf[128];
  std::snprintf(buf, sizeof buf, format, x);
  return buf;
}

std::vector<double> tail_as_double(std::span<const Quad> x, std::size_t count) {
  const std::size_t from = x.size() > count ? x.size() - count : 0;
  std::vector<double> out;
  for (std::size_t i = from; i < x.size(); ++i) out.push_back(to_double(x[i]));
  return out;
}

std::vector<Quad> partial_sums(std::span<const Quad> x) {
  std::vector<Quad> out(x.size());
  Quad s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = s += x[i];
  return out;
}

// Kummer diagnostics from precomputed kappa_n.
KummerResult kummer_from_kappas(std::span<const Quad> kappas, double margin, double tolerance) {
  KummerResult r;
  r.kappa = window_limit(kappas, kappas.size(), tolerance);
  if (kappas.empty()) return r;
  Quad lo = kappas[0], hi = kappas[0];
  for (Quad k : kappas) {
    lo = std::min(lo, k);
    hi = std::max(hi, k);
  }
  r.kappa_min = to_double(lo);
  r.raabe = to_double(kappas.back()) + 1.0;
  if (lo > margin) r.conclusion = SeriesConclusion::Converges;
  else if (hi < -margin) r.conclusion = SeriesConclusion::Diverges;
  return r;
}

}  // namespace

namespace {

// A limit estimate plus its value at full precision.
struct QuadLimit {
  LimitEstimate e;
  Quad value = 0;
};

QuadLimit window_limit_q(std::span<const Quad> sequence, std::size_t window, double tolerance) {
  QuadLimit q;
  LimitEstimate& e = q.e;
  e.tolerance = tolerance;
  if (sequence.empty() || window == 0) return q;
  const std::size_t w = std::min(window, sequence.size());
  const auto tail = sequence.subspan(sequence.size() - w);
  Quad lo = tail[0], hi = tail[0];
  bool finite = true;
  for (Quad x : tail) {
    finite = finite && quad_finite(x);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  e.window_estimates = tail_as_double(sequence, w);
  e.spread = to_double(hi - lo);
  const double value = to_double(hi);
  e.converged = finite && e.spread <= tolerance * std::max(1.0, std::abs(value));
  e.value = e.converged ? ExtendedReal::finite(value) : ExtendedReal::unknown(value);
  q.value = hi;
  return q;
}

}  // namespace

LimitEstimate window_limit(std::span<const Quad> sequence, std::size_t window, double tolerance) {
  return window_limit_q(sequence, window, tolerance).e;
}

KummerResult kummer_test(std::span<const double> u, std::span<const double> v, double margin, double tolerance) {
  if (u.size() != v.size() || u.size() < 2) throw UsageError("kummer_test needs equal windows of at least two terms");
  std::vector<Quad> kappas;
  for (std::size_t n = 0; n + 1 < u.size(); ++n) {
    if (!(u[n] > 0.0) || !(u[n + 1] > 0.0) || !(v[n] > 0.0)) {
      KummerResult r;
      r.kappa.tolerance = tolerance;
      return r;
    }
    kappas.push_back(static_cast<Quad>(v[n]) * u[n] / u[n + 1] - v[n + 1]);
  }
  return kummer_from_kappas(kappas, margin, tolerance);
}

SeriesVerdict classify_series(std::span<const Quad> terms, const CriteriaOptions& opts) {
  SeriesVerdict s;
  s.diagnostics.truncation = terms.empty() ? 0 : terms.size() - 1;
  const auto sums = partial_sums(terms);
  s.diagnostics.last_partial_sums = tail_as_double(sums, kShownSums);
  if (terms.empty()) {
    s.diagnostics.notes.push_back("no terms");
    return s;
  }
  const Quad total = sums.back();
  s.partial_sum = to_double(total);

  if (std::any_of(terms.begin(), terms.end(), [](Quad x) { return x < 0; })) {
    s.diagnostics.notes.push_back("negative terms; sign-based tests do not apply");
    return s;
  }
  if (total > opts.divergence_threshold) {
    s.conclusion = SeriesConclusion::Diverges;
    s.diagnostics.notes.push_back("partial sum exceeds " + fmt("%g", opts.divergence_threshold));
  }

  const std::size_t w = std::min(opts.window, terms.size() / 2);
  if (w < kMinWindow) {
    s.diagnostics.notes.push_back("too few terms for a tail window");
    return s;
  }
  const std::size_t first = terms.size() - w - 1;
  const auto tail = terms.subspan(first);
  if (std::all_of(tail.begin(), tail.end(), [](Quad x) { return x == 0; })) {
    if (s.conclusion != SeriesConclusion::Diverges) s.conclusion = SeriesConclusion::Converges;
    s.diagnostics.notes.push_back("tail window is identically zero");
    return s;
  }
  if (std::any_of(tail.begin(), tail.end(), [](Quad x) { return x == 0; })) {
    s.diagnostics.notes.push_back("zero terms inside the tail window");
    return s;
  }

  std::vector<Quad> kappas, ratios;
  for (std::size_t i = 0; i + 1 < tail.size(); ++i) {
    const Quad n = static_cast<Quad>(first + i);
    const Quad r = tail[i] / tail[i + 1];
    kappas.push_back(n * r - (n + 1));
    ratios.push_back(tail[i + 1] / tail[i]);
  }
  KummerResult k = kummer_from_kappas(kappas, opts.kummer_margin, opts.ratio_tolerance);
  s.diagnostics.kummer = to_double(kappas.back());
  s.diagnostics.ratio_estimates = tail_as_double(ratios, kShownSums);

  if (s.conclusion == SeriesConclusion::Diverges) {
    s.kummer = k;
    return s;
  }
  s.conclusion = k.conclusion;
  if (k.conclusion == SeriesConclusion::Converges) {
    const Quad N = static_cast<Quad>(terms.size() - 1);
    Quad rho_lo = ratios[0], rho_hi = ratios[0];
    for (Quad r : ratios) {
      rho_lo = std::min(rho_lo, r);
      rho_hi = std::max(rho_hi, r);
    }
    if (rho_hi <= kGeometricRatio && rho_hi - rho_lo <= opts.ratio_tolerance * (1 - rho_hi)) {
      // Settled ratio well below one: geometric remainder.
      const Quad rho = ratios.back();
      s.tail_estimate = to_double(terms.back() * rho / (1 - rho));
      s.tail_bound = to_double(terms.back() * rho_hi / (1 - rho_hi));
      s.diagnostics.notes.push_back("geometric tail, ratio " + fmt("%.6g", to_double(rho)));
    } else {
      s.tail_estimate = to_double(N * terms.back() / kappas.back());
      s.tail_bound = to_double(N * terms.back() / static_cast<Quad>(k.kappa_min));
    }
  } else if (k.conclusion == SeriesConclusion::Inconclusive) {
    s.diagnostics.notes.push_back("Kummer kappa within +-" + fmt("%g", opts.kummer_margin) +
                                  " or unstable over the window");
  }
  s.kummer = k;
  return s;
}

namespace {

Verdict series_verdict(const SeriesVerdict& s, Status on_diverge, Status on_converge) {
  Verdict v;
  v.diagnostics = s.diagnostics;
  switch (s.conclusion) {
    case SeriesConclusion::Diverges: v.status = on_diverge; break;
    case SeriesConclusion::Converges: v.status = on_converge; break;
    case SeriesConclusion::Inconclusive: v.status = Status::Inconclusive; break;
  }
  if (s.kummer) v.diagnostics.notes.push_back("Kummer kappa' = " + fmt("%.6g", s.kummer->raabe));
  return v;
}

std::vector<Quad> ratios(std::span<const Quad> num, std::span<const Quad> den, std::size_t from) {
  std::vector<Quad> out;
  for (std::size_t n = from; n < num.size(); ++n) out.push_back(den[n] == 0 ? Quad(0) : num[n] / den[n]);
  return out;
}

// Limit of a ratio sequence: the window when it has settled, otherwise an
// extrapolation from the increments, otherwise +infinity when the increments
// are positive with a divergent sum.
QuadLimit ratio_limit(std::span<const Quad> r, const CriteriaOptions& opts, std::vector<std::string>& notes) {
  QuadLimit q = window_limit_q(r, opts.window, opts.ratio_tolerance);
  LimitEstimate& e = q.e;
  if (e.converged || r.size() < 2) return q;
  std::vector<Quad> inc(r.size() - 1);
  for (std::size_t i = 0; i + 1 < r.size(); ++i) inc[i] = r[i + 1] - r[i];
  const auto w = std::min(opts.window, inc.size());
  const bool increasing = std::all_of(inc.end() - static_cast<std::ptrdiff_t>(w), inc.end(), [](Quad x) { return x > 0; });
  if (!increasing) {
    notes.push_back("ratio not settled and not monotone over the window");
    return q;
  }
  // Only the monotone tail enters the series test.
  std::size_t from = inc.size();
  while (from > 0 && inc[from - 1] > 0) --from;
  const auto s = classify_series(std::span<const Quad>(inc).subspan(from), opts);
  if (s.conclusion == SeriesConclusion::Diverges) {
    e.value = ExtendedReal::infinity();
    e.converged = true;
    notes.push_back("ratio increments are positive with a divergent sum");
  } else if (s.conclusion == SeriesConclusion::Converges) {
    q.value = r.back() + s.tail_estimate;
    const double value = to_double(q.value);
    const double err = std::abs(s.tail_bound - s.tail_estimate);
    notes.push_back("ratio extrapolated by the increment tail " + fmt("%.3g", s.tail_estimate));
    e.spread = std::max(e.spread, err);
    e.converged = err <= opts.ratio_tolerance * std::max(1.0, std::abs(value));
    e.value = e.converged ? ExtendedReal::finite(value) : ExtendedReal::unknown(value);
  } else {
    notes.push_back("ratio increments: " + std::string(to_string(s.conclusion)));
  }
  return q;
}

// Uncertainty of a finite limit estimate; algebraic tails settle slower than the window shows.
double limit_uncertainty(const LimitEstimate& e, std::size_t n, std::size_t window) {
  const double scale = std::max(1.0, static_cast<double>(n) / static_cast<double>(std::max<std::size_t>(window, 1)));
  return std::max(e.spread * scale, 8.0 * kQuadEpsilon * std::abs(e.value.value));
}

bool is_resolved(double value, double unc, double tol) {
  return std::isfinite(value) && std::isfinite(unc) && unc <= tol * std::max(1.0, std::abs(value));
}

MomentVector moment_vector(std::string quantity, std::size_t size) {
  MomentVector v;
  v.quantity = std::move(quantity);
  v.values.assign(size, ExtendedReal::unknown());
  v.uncertainty.assign(size, std::numeric_limits<double>::infinity());
  v.resolved.assign(size, false);
  return v;
}

void fill_constant(MomentVector& v, ExtendedReal value) {
  std::fill(v.values.begin(), v.values.end(), value);
  std::fill(v.uncertainty.begin(), v.uncertainty.end(), value.is_finite() ? 0.0 : std::numeric_limits<double>::infinity());
  std::fill(v.resolved.begin(), v.resolved.end(), value.kind != ExtendedReal::Kind::Unknown);
}

void set_entry(MomentVector& v, std::size_t n, Quad value, Quad unc, double tol) {
  const double x = to_double(value);
  const double u = to_double(unc);
  // An uncertainty beyond the scale of the value means not even its magnitude is known.
  const bool known = std::isfinite(x) && std::isfinite(u) && u <= std::max(1.0, std::abs(x));
  v.values[n] = known ? ExtendedReal::finite(x) : ExtendedReal::unknown(std::isfinite(x) ? x : 0.0);
  v.uncertainty[n] = u;
  v.resolved[n] = is_resolved(x, u, tol);
}

// 1 + sign * lambda * sum_{k<n} (F~_k d~ - d~_k), n >= 1, with its uncertainty.
void fill_tilted_sums(MomentVector& v, const PreciseSequences& seq, Quad d, double d_unc, Quad sign_lambda,
                      double tol) {
  Quad sum = 0, abs_sum = 0, f_sum = 0;
  const Quad lam = sign_lambda < 0 ? -sign_lambda : sign_lambda;
  for (std::size_t n = 1; n <= seq.last(); ++n) {
    const Quad a = seq.f0()[n - 1] * d, b = seq.d()[n - 1];
    sum += a - b;
    abs_sum += quad_abs(a) + quad_abs(b);
    f_sum += quad_abs(seq.f0()[n - 1]);
    const Quad unc = lam * (static_cast<Quad>(d_unc) * f_sum + 4 * kQuadEpsilon * abs_sum);
    set_entry(v, n, 1 + sign_lambda * sum, unc, tol);
  }
}

struct Explosion {
  Verdict verdict;
  SeriesVerdict series;
};

Explosion check_explosive(const PreciseSequences& plain, const CriteriaOptions& opts) {
  Explosion e;
  e.series = classify_series(plain.m(), opts);
  e.verdict = series_verdict(e.series, Status::Holds, Status::Fails);
  if (e.verdict.status == Status::Holds) throw NotExplosive("sum m_n diverges; the process is non-explosive");
  if (e.verdict.status == Status::Inconclusive) {
    throw InconclusiveSeries("explosiveness is not certified at N = " + std::to_string(opts.N));
  }
  return e;
}

// Sum of a convergent series through N plus its tail, with the tail's uncertainty.
struct SeriesTotal {
  Quad total;
  double unc;
};

SeriesTotal certified_total(std::span<const Quad> terms, const CriteriaOptions& opts, const char* what) {
  const auto s = classify_series(terms, opts);
  if (s.conclusion != SeriesConclusion::Converges) {
    if (s.conclusion == SeriesConclusion::Diverges) throw PreviousOrderInfinite(std::string(what) + " diverges");
    throw InconclusiveSeries(std::string(what) + ": convergence not certified");
  }
  Quad total = 0;
  for (Quad t : terms) total += t;
  return {total + s.tail_estimate, std::abs(s.tail_bound - s.tail_estimate) + 4 * kQuadEpsilon * to_double(total)};
}

}  // namespace

Verdict uniqueness(const SingleBirthModel& model, const CriteriaOptions& opts) {
  const PreciseSequences seq(model, Coefficients::zero(), opts.N);
  return series_verdict(classify_series(seq.m(), opts), Status::Holds, Status::Fails);
}

Verdict recurrence(const SingleBirthModel& model, const CriteriaOptions& opts) {
  const PreciseSequences seq(model, Coefficients::zero(), opts.N);
  Verdict v = series_verdict(classify_series(seq.f0(), opts), Status::Holds, Status::Fails);
  const auto unique = series_verdict(classify_series(seq.m(), opts), Status::Holds, Status::Fails);
  if (unique.status != Status::Holds) {
    v.diagnostics.notes.push_back(std::string("assumes a non-explosive process; uniqueness is ") +
                                  to_string(unique.status));
  }
  return v;
}

MomentVector return_probability(const SingleBirthModel& model, const CriteriaOptions& opts) {
  const PreciseSequences seq(model, Coefficients::zero(), opts.N);
  const std::size_t N = seq.last();
  auto out = moment_vector("P_n(sigma_0 < inf)", N + 1);
  const auto s = classify_series(seq.f0(), opts);
  if (s.conclusion == SeriesConclusion::Diverges) {
    fill_constant(out, ExtendedReal::finite(1.0));
    return out;
  }
  if (s.conclusion != SeriesConclusion::Converges) {
    throw InconclusiveSeries("sum F_n^(0) is neither certified divergent nor convergent at N = " + std::to_string(N));
  }
  const Quad tail = s.tail_estimate;
  const Quad tail_unc = std::max(std::abs(s.tail_bound - s.tail_estimate), s.tail_estimate * 1e-3);
  std::vector<Quad> suffix(N + 2, 0);
  suffix[N + 1] = tail;
  for (std::size_t k = N + 1; k-- > 0;) suffix[k] = suffix[k + 1] + seq.f0()[k];
  const Quad total = suffix[0];
  auto put = [&](std::size_t n, Quad p) {
    const Quad unc = tail_unc / total * (1 + p) + 4 * kQuadEpsilon * p;
    out.values[n] = ExtendedReal::finite(to_double(p));
    out.uncertainty[n] = to_double(unc);
    out.resolved[n] = unc <= opts.resolution_tolerance * p;
  };
  put(0, suffix[1] / total);
  for (std::size_t n = 1; n <= N; ++n) put(n, suffix[n] / total);
  return out;
}

namespace {

MeanReturnTime mean_return_impl(const PreciseSequences& seq, const CriteriaOptions& opts) {
  const std::size_t N = seq.last();
  MeanReturnTime r;
  const auto unique = series_verdict(classify_series(seq.m(), opts), Status::Holds, Status::Fails);
  r.recurrent = series_verdict(classify_series(seq.f0(), opts), Status::Holds, Status::Fails);
  r.E = moment_vector("E_n sigma_0", N + 1);

  std::vector<std::string> notes;
  const auto term_ratio = ratios(seq.d(), seq.f0(), 1);
  const auto d_limit = ratio_limit(term_ratio, opts, notes);
  r.d = d_limit.e;

  Diagnostics diag;
  diag.truncation = N;
  {
    const auto F = partial_sums(seq.f0()), D = partial_sums(seq.d());
    diag.ratio_estimates = tail_as_double(ratios(D, F, 0), kShownSums);
  }
  diag.notes = notes;

  r.ergodic.diagnostics = diag;
  r.strongly_ergodic.diagnostics = diag;
  r.strongly_ergodic.diagnostics.notes.push_back(
      "evaluated under uniqueness alone; recurrence is not required for this conclusion");

  const auto& d = r.d.value;
  if (r.recurrent.status == Status::Fails) {
    r.ergodic.status = Status::Fails;
    r.ergodic.diagnostics.notes.push_back("transient");
  } else if (d.kind == ExtendedReal::Kind::PosInf) {
    r.ergodic.status = Status::Fails;
    r.ergodic.diagnostics.notes.push_back("d = +inf");
  } else if (r.recurrent.status == Status::Holds && d.is_finite()) {
    r.ergodic.status = Status::Holds;
  } else {
    r.ergodic.diagnostics.notes.push_back(std::string("recurrence ") + to_string(r.recurrent.status) +
                                          ", d " + (d.is_finite() ? "finite" : "unsettled"));
  }

  if (r.recurrent.status == Status::Fails || d.kind == ExtendedReal::Kind::PosInf) {
    fill_constant(r.E, ExtendedReal::infinity());
  } else if (d.is_finite()) {
    const double d_unc = limit_uncertainty(r.d, N, opts.window);
    const double e0 = 1.0 / seq.up(0) + d.value;
    r.E.values[0] = ExtendedReal::finite(e0);
    r.E.uncertainty[0] = d_unc;
    r.E.resolved[0] = is_resolved(e0, d_unc, opts.resolution_tolerance);
    // E_n = sum_{k<n} (F_k d - d_k), which is fill_tilted_sums with lambda = 1 minus the leading 1.
    fill_tilted_sums(r.E, seq, d_limit.value, d_unc, 1, opts.resolution_tolerance);
    for (std::size_t n = 1; n <= N; ++n) {
      if (r.E.values[n].is_finite()) r.E.values[n].value -= 1.0;
      r.E.resolved[n] = r.E.values[n].is_finite() &&
                        is_resolved(r.E.values[n].value, r.E.uncertainty[n], opts.resolution_tolerance);
    }
  }

  auto& se = r.strongly_ergodic;
  if (unique.status != Status::Holds) {
    se.diagnostics.notes.push_back(std::string("uniqueness is ") + to_string(unique.status));
  }
  if (r.ergodic.status == Status::Fails || unique.status == Status::Fails) {
    se.status = Status::Fails;
    return r;
  }
  if (!d.is_finite()) return r;

  const std::size_t p = r.E.resolved_prefix();
  se.diagnostics.notes.push_back("resolved prefix " + std::to_string(p));
  if (p < 4 * kMinWindow) {
    se.diagnostics.notes.push_back("resolved prefix too short to judge boundedness");
    return r;
  }
  std::vector<Quad> inc;
  for (std::size_t n = 1; n + 1 < p; ++n) inc.push_back(static_cast<Quad>(r.E.values[n + 1].value) - r.E.values[n].value);
  double sup = 0.0;
  for (std::size_t n = 0; n < p; ++n) sup = std::max(sup, r.E.values[n].value);
  for (std::size_t n = p > kShownSums ? p - kShownSums : 0; n < p; ++n) {
    se.diagnostics.last_partial_sums.push_back(r.E.values[n].value);
  }

  // A plateau: over the second half of the prefix every increment is below
  // the resolution of the entries it joins.
  bool plateau = true;
  for (std::size_t n = p / 2; n + 1 < p; ++n) {
    const double step = r.E.values[n + 1].value - r.E.values[n].value;
    plateau = plateau && std::abs(step) <= r.E.uncertainty[n] + r.E.uncertainty[n + 1] +
                                               opts.resolution_tolerance * std::max(1.0, std::abs(r.E.values[n].value));
  }
  if (plateau) {
    se.status = Status::Holds;
    r.sup = sup;
    se.diagnostics.notes.push_back("E_n sigma_0 constant over the second half of the resolved prefix");
    return r;
  }
  CriteriaOptions local = opts;
  local.window = std::min(opts.window, inc.size() / 2);
  const auto s = classify_series(inc, local);
  se.diagnostics.kummer = s.diagnostics.kummer;
  se.diagnostics.ratio_estimates = s.diagnostics.ratio_estimates;
  for (const auto& n : s.diagnostics.notes) se.diagnostics.notes.push_back("increments: " + n);
  if (s.conclusion == SeriesConclusion::Converges) {
    se.status = Status::Holds;
    r.sup = sup + s.tail_bound;
  } else if (s.conclusion == SeriesConclusion::Diverges) {
    se.status = Status::Fails;
  }
  return r;
}

// F~ with c = +lambda (exp) or -lambda (Laplace): limit of d~_n / F~_n, or of
// the partial-sum ratio restricted to positive partial sums of F~.
QuadLimit tilted_limit(const PreciseSequences& seq, const CriteriaOptions& opts, std::vector<std::string>& notes) {
  const std::size_t N = seq.last();
  const std::size_t w = std::min(opts.window, N);
  bool positive_tail = true;
  for (std::size_t n = N + 1 - w; n <= N; ++n) positive_tail = positive_tail && seq.f0()[n] > 0;
  if (positive_tail) return ratio_limit(ratios(seq.d(), seq.f0(), 1), opts, notes);
  notes.push_back("F~ not positive over the window; using the partial-sum ratio");
  const auto F = partial_sums(seq.f0()), D = partial_sums(seq.d());
  std::vector<Quad> r;
  for (std::size_t n = 0; n <= N; ++n) r.push_back(F[n] > 0 ? D[n] / F[n] : Quad(0));
  return ratio_limit(r, opts, notes);
}

void require_recurrent(const SingleBirthModel& model, const CriteriaOptions& opts, const char* what) {
  if (recurrence(model, opts).status == Status::Fails) {
    throw DomainError(std::string(what) + " requires a recurrent process");
  }
}

}  // namespace

MeanReturnTime mean_return_time(const SingleBirthModel& model, const CriteriaOptions& opts) {
  return mean_return_impl(PreciseSequences(model, Coefficients::zero(), opts.N), opts);
}

HittingMoment hitting_moment(const SingleBirthModel& model, std::size_t i0, int ell, const CriteriaOptions& opts) {
  if (ell < 1 || ell > opts.max_order) {
    throw UsageError("moment order must be in 1.." + std::to_string(opts.max_order));
  }
  if (i0 + opts.window >= opts.N) throw UsageError("target state must lie below N - window");
  const PreciseSequences seq(model, Coefficients::zero(), opts.N);
  const std::size_t N = seq.last();

  std::vector<Quad> src(N + 1, 0);
  for (std::size_t j = 0; j <= N; ++j) {
    if (j + 1 == i0) src[j] = seq.up(j);
    else if (j > i0) src[j] = model.row(j).rate_to(i0);
  }
  const auto u = seq.recursion(0, src);
  std::vector<Quad> u_sum(N + 2, 0);  // u_sum[n] = sum_{i0 <= k < n} u_k for n >= i0
  for (std::size_t n = i0; n <= N; ++n) u_sum[n + 1] = u_sum[n] + u[n];

  HittingMoment h;
  if (series_verdict(classify_series(seq.f0(), opts), Status::Holds, Status::Fails).status == Status::Fails) {
    // Transient: the target is missed with positive probability.
    if (ell > 1) throw PreviousOrderInfinite("the process is transient; the first moment is infinite");
    h.at_target = ExtendedReal::infinity();
    h.E = moment_vector("E_n sigma_" + std::to_string(i0) + "^1", N + 1);
    fill_constant(h.E, h.at_target);
    h.order_limits.push_back({ExtendedReal::infinity(), {}, true, opts.ratio_tolerance, 0.0});
    h.order_tolerances.push_back(0.0);
    return h;
  }
  std::vector<Quad> prev(N + 1, 1);
  const std::string target = std::to_string(i0);
  for (int L = 1; L <= ell; ++L) {
    const auto v = seq.recursion(0, prev);
    std::vector<std::string> notes;
    std::vector<Quad> r;
    for (std::size_t n = i0 + 1; n <= N; ++n) r.push_back(u[n] == 0 ? Quad(0) : L * v[n] / u[n]);
    const auto qlim = ratio_limit(r, opts, notes);
    const auto& lim = qlim.e;
    h.order_limits.push_back(lim);
    h.E = moment_vector("E_n sigma_" + target + "^" + std::to_string(L), N + 1);

    if (lim.value.kind == ExtendedReal::Kind::PosInf) {
      if (L < ell) throw PreviousOrderInfinite("moment of order " + std::to_string(L) + " is infinite");
      h.at_target = lim.value;
      fill_constant(h.E, lim.value);
      h.order_tolerances.push_back(0.0);
      return h;
    }
    if (!lim.value.is_finite()) {
      if (L < ell) throw InconclusiveSeries("moment of order " + std::to_string(L) + " did not settle");
      h.at_target = lim.value;
      h.order_tolerances.push_back(std::numeric_limits<double>::infinity());
      return h;
    }

    const Quad e = qlim.value;
    const double e_unc = limit_uncertainty(lim, N, opts.window);
    h.order_tolerances.push_back(e_unc);
    std::vector<Quad> values(N + 1);
    // n < i0: L sum_{n<=k<i0} v_k + (1 - sum_{n<=k<i0} u_k) e
    Quad vs = 0, us = 0, abs_vs = 0;
    values[i0] = e;
    set_entry(h.E, i0, e, e_unc, opts.resolution_tolerance);
    for (std::size_t n = i0; n-- > 0;) {
      vs += v[n];
      us += u[n];
      abs_vs += quad_abs(v[n]);
      values[n] = L * vs + (1 - us) * e;
      const Quad unc = quad_abs(1 - us) * e_unc + 4 * kQuadEpsilon * (L * abs_vs + quad_abs(e));
      set_entry(h.E, n, values[n], unc, opts.resolution_tolerance);
    }
    // n > i0: -L sum_{i0<=k<n} v_k + (1 + sum_{i0<=k<n} u_k) e
    vs = 0;
    abs_vs = 0;
    for (std::size_t n = i0 + 1; n <= N; ++n) {
      vs += v[n - 1];
      abs_vs += quad_abs(v[n - 1]);
      const Quad grow = 1 + u_sum[n];
      values[n] = -L * vs + grow * e;
      const Quad unc = grow * e_unc + 4 * kQuadEpsilon * (L * abs_vs + grow * quad_abs(e));
      set_entry(h.E, n, values[n], unc, opts.resolution_tolerance);
    }
    h.at_target = ExtendedReal::finite(to_double(e));
    prev = std::move(values);
  }
  return h;
}

MomentVector lifetime_moment(const SingleBirthModel& model, int ell, const CriteriaOptions& opts) {
  if (ell < 1 || ell > opts.max_order) {
    throw UsageError("moment order must be in 1.." + std::to_string(opts.max_order));
  }
  const PreciseSequences seq(model, Coefficients::zero(), opts.N);
  check_explosive(seq, opts);
  const std::size_t N = seq.last();
  MomentVector out;
  std::vector<Quad> prev(N + 1, 1);
  for (int L = 1; L <= ell; ++L) {
    const auto mbar = seq.recursion(0, prev);
    const std::string what = "sum of order-" + std::to_string(L) + " life-time terms";
    SeriesTotal tot;
    try {
      tot = certified_total(mbar, opts, what.c_str());
    } catch (const PreviousOrderInfinite&) {
      out = moment_vector("E_n tau_inf^" + std::to_string(L), N + 1);
      if (L < ell) throw;
      fill_constant(out, ExtendedReal::infinity());
      return out;
    }
    out = moment_vector("E_n tau_inf^" + std::to_string(L), N + 1);
    std::vector<Quad> values(N + 1);
    Quad suffix = tot.total;
    for (std::size_t n = 0; n <= N; ++n) {
      values[n] = L * suffix;
      set_entry(out, n, values[n], L * (static_cast<Quad>(tot.unc) + 4 * kQuadEpsilon * suffix), opts.resolution_tolerance);
      suffix -= mbar[n];
    }
    prev = std::move(values);
  }
  return out;
}

ExpMoment exp_moment_return(const SingleBirthModel& model, double lambda, const CriteriaOptions& opts) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  model.require_rows_through(opts.N);
  if (lambda >= model.up(0)) throw RateBoundViolated("lambda must be below q01 = " + fmt("%.17g", model.up(0)));
  for (std::size_t i = 0; i <= opts.N; ++i) {
    if (lambda >= model.total_rate(i)) {
      throw RateBoundViolated("lambda must be below q_i; fails at i = " + std::to_string(i));
    }
  }
  const PreciseSequences seq(model, Coefficients::constant(lambda), opts.N);
  const std::size_t N = seq.last();
  ExpMoment r;
  std::vector<std::string> notes;
  const auto dt_limit = tilted_limit(seq, opts, notes);
  r.d_tilde = dt_limit.e;
  r.feasible.diagnostics.truncation = N;
  r.feasible.diagnostics.notes = notes;
  r.E = moment_vector("E_n exp(lambda sigma_0)", N + 1);
  const auto& dt = r.d_tilde.value;
  if (dt.kind == ExtendedReal::Kind::PosInf) {
    r.feasible.status = Status::Fails;
    fill_constant(r.E, ExtendedReal::infinity());
    return r;
  }
  if (!dt.is_finite()) return r;

  const Quad d = dt_limit.value;
  Quad F = 0, D = 0;
  for (std::size_t n = 1; n <= N; ++n) {
    F += seq.f0()[n - 1];
    D += seq.d()[n - 1];
    if (n >= 2 && F <= 0 && !(d * F > D)) {
      throw ConditionViolated(n, "side condition d~ sum F~ > sum d~ fails at n = " + std::to_string(n));
    }
  }
  r.feasible.status = Status::Holds;
  const double q01 = seq.up(0);
  const double d_unc = limit_uncertainty(r.d_tilde, N, opts.window);
  const double e0 = q01 * (1.0 + lambda * dt.value) / (q01 - lambda);
  r.E.values[0] = ExtendedReal::finite(e0);
  r.E.uncertainty[0] = q01 * lambda * d_unc / (q01 - lambda);
  r.E.resolved[0] = is_resolved(e0, r.E.uncertainty[0], opts.resolution_tolerance);
  fill_tilted_sums(r.E, seq, d, d_unc, lambda, opts.resolution_tolerance);
  return r;
}

MomentVector laplace_return(const SingleBirthModel& model, double lambda, const CriteriaOptions& opts) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  require_recurrent(model, opts, "laplace_return");
  const PreciseSequences seq(model, Coefficients::constant(-lambda), opts.N);
  const std::size_t N = seq.last();
  std::vector<std::string> notes;
  const auto qlim = tilted_limit(seq, opts, notes);
  const auto& lim = qlim.e;
  if (!lim.value.is_finite()) {
    throw InconclusiveSeries("d~ did not settle at N = " + std::to_string(N) +
                             (notes.empty() ? std::string() : "; " + notes.back()));
  }
  auto out = moment_vector("E_n exp(-lambda sigma_0)", N + 1);
  const double q01 = seq.up(0);
  const double d_unc = limit_uncertainty(lim, N, opts.window);
  const double e0 = q01 * (1.0 - lambda * lim.value.value) / (q01 + lambda);
  out.values[0] = ExtendedReal::finite(e0);
  out.uncertainty[0] = q01 * lambda * d_unc / (q01 + lambda);
  out.resolved[0] = is_resolved(e0, out.uncertainty[0], opts.resolution_tolerance);
  fill_tilted_sums(out, seq, qlim.value, d_unc, -lambda, opts.resolution_tolerance);
  return out;
}

MomentVector lifetime_transforms(const SingleBirthModel& model, double lambda, TransformDirection direction,
                                 const CriteriaOptions& opts) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  check_explosive(PreciseSequences(model, Coefficients::zero(), opts.N), opts);
  const bool laplace = direction == TransformDirection::Laplace;
  const PreciseSequences seq(model, Coefficients::constant(laplace ? -lambda : lambda), opts.N);
  const std::size_t N = seq.last();
  const Quad lam = lambda;
  auto out = moment_vector(laplace ? "E_n exp(-lambda tau_inf)" : "E_n exp(lambda tau_inf)", N + 1);
  if (!laplace) {
    Quad S = 0;
    for (std::size_t n = 0; n <= N; ++n) {
      S += seq.m()[n];
      if (!(lam * S < 1)) {
        throw FeasibilityViolated("lambda * sum m~ reaches 1 at n = " + std::to_string(n));
      }
    }
  }
  const auto tot = certified_total(seq.m(), opts, "sum m~");

  if (laplace) {
    const Quad den = 1 + lam * tot.total;
    Quad head = 0;
    for (std::size_t n = 0; n <= N; ++n) {
      const Quad value = (1 + lam * head) / den;
      set_entry(out, n, value, lam * tot.unc * value / den + 4 * kQuadEpsilon, opts.resolution_tolerance);
      head += seq.m()[n];
    }
    return out;
  }

  if (!(lam * tot.total < 1)) throw FeasibilityViolated("lambda * sum m~ reaches 1 in the tail estimate");
  const Quad cbar = tot.total / (1 - lam * tot.total);
  const Quad one_minus = 1 - lam * tot.total;
  const Quad cbar_unc = tot.unc / (one_minus * one_minus);
  Quad head = 0;
  for (std::size_t n = 0; n <= N; ++n) {
    const Quad value = 1 + lam * (cbar * (1 - lam * head) - head);
    const Quad unc = lam * quad_abs(1 - lam * head) * cbar_unc + 4 * kQuadEpsilon * quad_abs(value);
    set_entry(out, n, value, unc, opts.resolution_tolerance);
    head += seq.m()[n];
  }
  return out;
}

DecayProfile decay_profile(const SingleBirthModel& model, double lambda, double g0, std::size_t N) {
  DecayProfile p;
  p.g.assign(N + 1, g0);
  if (N == 0 || g0 == 0.0) return p;
  const PreciseSequences seq(model, Coefficients::constant(lambda), N - 1);
  Quad head = 0;
  for (std::size_t n = 1; n <= N; ++n) {
    head += seq.m()[n - 1];
    const Quad g = g0 * (1 - static_cast<Quad>(lambda) * head);
    p.g[n] = to_double(g);
    if (!p.first_nonpositive && (g0 > 0 ? g <= 0 : g >= 0)) p.first_nonpositive = n;
  }
  return p;
}

MzCondition mz_sufficient_condition(const SingleBirthModel& model, const CriteriaOptions& opts) {
  require_recurrent(model, opts, "the MZ condition");
  const PreciseSequences seq(model, Coefficients::zero(), opts.N);
  const std::size_t N = seq.last();
  std::vector<Quad> t(N + 1);
  for (std::size_t j = 0; j <= N; ++j) t[j] = 1 / (seq.up(j) * seq.f0()[j]);
  MzCondition r;
  r.inner = classify_series(t, opts);
  r.sufficient.diagnostics = r.inner.diagnostics;
  r.M.tolerance = opts.ratio_tolerance;
  if (r.inner.conclusion == SeriesConclusion::Diverges) {
    r.M.value = ExtendedReal::infinity();
    r.M.converged = true;
    r.sufficient.status = Status::Fails;
    r.sufficient.diagnostics.notes.push_back("sum 1/(q_{j,j+1} F_j) diverges, so M = +inf");
    return r;
  }
  if (r.inner.conclusion != SeriesConclusion::Converges) {
    r.sufficient.diagnostics.notes.push_back("inner series not settled");
    return r;
  }
  std::vector<Quad> tails(N + 2, 0);
  tails[N + 1] = r.inner.tail_estimate;
  for (std::size_t j = N + 1; j-- > 0;) tails[j] = tails[j + 1] + t[j];
  std::vector<Quad> M(N);
  Quad head = 0;  // sum_{k=1}^{n-1} F_k
  for (std::size_t n = 1; n <= N; ++n) {
    M[n - 1] = head * tails[n];
    head += seq.f0()[n];
  }
  const auto window = window_limit(M, opts.window, opts.ratio_tolerance);
  const Quad sup = *std::max_element(M.begin(), M.end());
  r.M = window;
  r.M.value = ExtendedReal::finite(to_double(sup));
  // The sup is certified when it is attained before the window and the window is not rising.
  const auto w = std::min(opts.window, M.size());
  bool falling = true;
  for (std::size_t i = M.size() - w + 1; i < M.size(); ++i) falling = falling && M[i] <= M[i - 1];
  const bool attained_early = window.window_estimates.empty() ||
                              *std::max_element(window.window_estimates.begin(), window.window_estimates.end()) <
                                  to_double(sup);
  r.M.converged = window.converged || (falling && attained_early);
  if (r.M.converged) {
    r.sufficient.status = Status::Holds;
  } else {
    r.M.value = ExtendedReal::unknown(to_double(sup));
    r.sufficient.diagnostics.notes.push_back("M_n still rising over the window");
  }
  return r;
}

}  // namespace sbp
