#include "sbp/poisson.hpp"

#include <algorithm>
#include <cmath>

#include "sbp/errors.hpp"

namespace sbp {

namespace {

constexpr double kZeroCoefficient = 1e-12;
constexpr double kBoundaryTolerance = 1e-9;

bool negligible(const ScaledReal& value, double scale, double tol) {
  return value.is_zero() || std::abs(value.to_double()) <= tol * scale;
}

struct Boundary {
  BoundaryStatus status;
  double anchor;
  std::string notice;
};

// anchor * kappa = rho, with magnitudes kappa_scale and rho_scale.
Boundary resolve_boundary(const ScaledReal& kappa, double kappa_scale, const ScaledReal& rho, double rho_scale,
                          std::optional<double> hint, const char* anchor_name) {
  if (!negligible(kappa, kappa_scale, kZeroCoefficient)) {
    Boundary b{BoundaryStatus::Determined, (rho / kappa).to_double(), {}};
    if (hint && *hint != b.anchor) {
      b.notice = std::string("boundary equation determines ") + anchor_name + "; the supplied value was ignored";
    }
    return b;
  }
  if (!negligible(rho, rho_scale, 1e-10)) {
    throw DegenerateBoundary(std::string("boundary equation reads 0 = ") + rho.to_string(6) +
                             "; no solution exists");
  }
  return {BoundaryStatus::Underdetermined, hint.value_or(0.0),
          std::string("boundary equation holds for every ") + anchor_name + "; solution is underdetermined"};
}

}  // namespace

void TriangularSystem::validate() const {
  const std::size_t n = size();
  if (alpha.size() != n) throw UsageError("alpha must have one row per equation");
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i].size() != i) throw UsageError("alpha row " + std::to_string(i) + " must have " +
                                               std::to_string(i) + " entries");
  }
  if (!beta.empty()) {
    if (beta.size() != n) throw UsageError("beta must match the number of equations");
    for (double b : beta) {
      if (b == 0.0 || !std::isfinite(b)) throw UsageError("beta entries must be finite and nonzero");
    }
  }
}

std::vector<double> solve_triangular(const TriangularSystem& system) {
  system.validate();
  std::vector<double> h(system.size());
  for (std::size_t n = 0; n < system.size(); ++n) {
    long double acc = system.f[n];
    for (std::size_t k = 0; k < n; ++k) acc += static_cast<long double>(system.alpha[n][k]) * h[k];
    h[n] = static_cast<double>(acc / system.divisor(n));
  }
  return h;
}

std::vector<double> gamma_column(const TriangularSystem& system, std::size_t k) {
  system.validate();
  if (k >= system.size()) throw UsageError("gamma column index out of range");
  std::vector<double> col(system.size() - k);
  col[0] = 1.0;
  for (std::size_t n = k + 1; n < system.size(); ++n) {
    long double acc = 0.0L;
    for (std::size_t j = k; j < n; ++j) acc += static_cast<long double>(system.alpha[n][j]) * col[j - k];
    col[n - k] = static_cast<double>(acc / system.divisor(n));
  }
  return col;
}

std::vector<std::vector<double>> gamma_table(const TriangularSystem& system) {
  const std::size_t n = system.size();
  std::vector<std::vector<double>> table(n);
  for (std::size_t i = 0; i < n; ++i) table[i].assign(i + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto col = gamma_column(system, k);
    for (std::size_t r = k; r < n; ++r) table[r][k] = col[r - k];
  }
  return table;
}

std::vector<std::vector<double>> gamma_table_alternative(const TriangularSystem& system) {
  system.validate();
  const std::size_t size = system.size();
  std::vector<std::vector<double>> table(size);
  for (std::size_t n = 0; n < size; ++n) {
    table[n].assign(n + 1, 0.0);
    table[n][n] = 1.0;
    // Row n needs gamma_{nj} for j > k, so fill k downward.
    for (std::size_t k = n; k-- > 0;) {
      long double acc = 0.0L;
      for (std::size_t j = k + 1; j <= n; ++j) {
        acc += static_cast<long double>(table[n][j]) * system.alpha[j][k] / system.divisor(j);
      }
      table[n][k] = static_cast<double>(acc);
    }
  }
  return table;
}

std::vector<double> solve_triangular_gamma(const TriangularSystem& system) {
  const auto table = gamma_table(system);
  std::vector<double> h(system.size());
  for (std::size_t n = 0; n < system.size(); ++n) {
    long double acc = 0.0L;
    for (std::size_t k = 0; k <= n; ++k) acc += static_cast<long double>(table[n][k]) * system.f[k] / system.divisor(k);
    h[n] = static_cast<double>(acc);
  }
  return h;
}

std::vector<double> PoissonSolution::values() const {
  if (!representable) throw NumericOverflow("solution exceeds double range; use the scaled values");
  std::vector<double> out(g.size());
  std::transform(g.begin(), g.end(), out.begin(), [](const ScaledReal& x) { return x.to_double(); });
  return out;
}

PoissonSolution solve_poisson(const PoissonProblem& p, PoissonMethod method, Execution execution) {
  const std::size_t N = p.N;
  if (p.f.size() < N) throw UsageError("f needs at least N entries");
  PoissonSolution sol;
  sol.g.assign(N + 1, ScaledReal(p.g0));
  if (N == 0) return sol;
  p.model.require_rows_through(N - 1);

  const bool harmonic = std::all_of(p.f.begin(), p.f.begin() + static_cast<long>(N), [](double v) { return v == 0.0; });
  const SequenceTable table(p.model, p.c, N - 1,
                            {.full_triangle = method == PoissonMethod::Triangle, .execution = execution});

  // Harmonic case: g_n = g0 (1 - sum_{k<n} sum_j F~_k^(j) c_j / q_{j,j+1}).
  std::vector<ScaledReal> source(N);
  for (std::size_t j = 0; j < N; ++j) {
    source[j] = harmonic ? ScaledReal(table.c(j)) : ScaledReal(p.f[j] - table.c(j) * p.g0);
  }

  std::vector<ScaledReal> h;
  if (method == PoissonMethod::Recursion) {
    h = table.recursion(0, source);
  } else {
    h.resize(N);
    for (std::size_t k = 0; k < N; ++k) {
      ScaledSum acc;
      for (std::size_t j = 0; j <= k; ++j) {
        if (!source[j].is_zero()) acc.add(table.f(k, j) * source[j] / ScaledReal(table.up(j)));
      }
      h[k] = acc.value();
    }
  }

  sol.w.resize(N);
  if (harmonic) {
    const ScaledReal g0(p.g0);
    ScaledSum profile;
    profile.add(ScaledReal(1.0));
    for (std::size_t k = 0; k < N; ++k) {
      sol.w[k] = -(g0 * h[k]);
      profile.add(-h[k]);
      sol.g[k + 1] = g0 * profile.value();
    }
  } else {
    ScaledSum g;
    g.add(ScaledReal(p.g0));
    for (std::size_t k = 0; k < N; ++k) {
      sol.w[k] = h[k];
      g.add(h[k]);
      sol.g[k + 1] = g.value();
    }
  }
  sol.g[0] = ScaledReal(p.g0);

  sol.representable = std::all_of(sol.g.begin(), sol.g.end(), [](const ScaledReal& x) { return x.representable(); });
  if (sol.representable) {
    const auto gv = sol.values();
    sol.residual = poisson_residual(p.model, p.c, p.f, gv, N);
  } else {
    sol.residual = std::nan("");
  }
  return sol;
}

double poisson_residual(const SingleBirthModel& model, const Coefficients& c, std::span<const double> f,
                        std::span<const double> g, std::size_t N) {
  if (g.size() < N + 1 || f.size() < N) throw UsageError("poisson_residual: g needs N+1 and f needs N entries");
  long double worst = 0.0L;
  for (std::size_t i = 0; i < N; ++i) {
    const RateRow& row = model.row(i);
    const long double gi = g[i];
    long double omega = static_cast<long double>(row.up()) * (g[i + 1] - gi);
    for (const auto& d : row.down()) omega += static_cast<long double>(d.rate) * (g[d.to] - gi);
    omega += static_cast<long double>(c.at(i)) * gi;
    worst = std::max(worst, std::abs(omega - f[i]));
  }
  return static_cast<double>(worst);
}

namespace {

struct FinitePass {
  std::vector<long double> g;
  Boundary boundary;
};

struct RowResidual {
  std::vector<long double> r;  // f - Omega g
  std::vector<long double> scale;  // sum of |terms| per row
};

// Repeats `pass` on the residual until it stops shrinking.  Each pass anchors
// the correction with 0 so the caller's anchor survives when it is free.
template <class Pass, class Residual>
FiniteSolution refine(Pass pass, Residual residual, std::span<const double> f, std::optional<double> hint,
                      std::size_t boundary_row) {
  FinitePass first = pass(std::vector<long double>(f.begin(), f.end()), hint);
  std::vector<long double> g = std::move(first.g);
  RowResidual res = residual(g);
  auto size = [](const RowResidual& x) {
    long double worst = 0.0L;
    for (std::size_t i = 0; i < x.r.size(); ++i) worst = std::max(worst, std::abs(x.r[i]) / std::max(x.scale[i], 1e-300L));
    return worst;
  };
  long double current = size(res);
  for (int step = 0; step < 4 && current > 0.0L; ++step) {
    FinitePass corr;
    try {
      corr = pass(res.r, 0.0);
    } catch (const DegenerateBoundary&) {
      break;
    }
    std::vector<long double> next = g;
    for (std::size_t i = 0; i < next.size(); ++i) next[i] += corr.g[i];
    RowResidual next_res = residual(next);
    const long double next_size = size(next_res);
    if (!(next_size < 0.5L * current)) break;
    g = std::move(next);
    res = std::move(next_res);
    current = next_size;
  }

  FiniteSolution sol;
  sol.status = first.boundary.status;
  sol.notice = first.boundary.notice;
  sol.g.assign(g.begin(), g.end());
  sol.anchor = sol.g[boundary_row == 0 ? sol.g.size() - 1 : 0];
  const long double bs = res.scale[boundary_row];
  sol.boundary_defect = bs > 0.0L ? static_cast<double>(std::abs(res.r[boundary_row]) / bs) : 0.0;
  sol.boundary_ok = sol.boundary_defect <= kBoundaryTolerance;
  return sol;
}

}  // namespace

FiniteSolution solve_poisson_finite(const SingleBirthModel& model, const Coefficients& c, std::span<const double> f,
                                    std::size_t N, std::optional<double> g0_hint) {
  if (N < 1) throw UsageError("finite state space needs N >= 1");
  if (f.size() < N + 1) throw UsageError("f needs N+1 entries");
  model.require_rows_through(N);
  const SequenceTable table(model, c, N - 1, {.full_triangle = false, .execution = Execution::Serial});

  std::vector<ScaledReal> cs(N);
  for (std::size_t j = 0; j < N; ++j) cs[j] = ScaledReal(table.c(j));
  const auto B = table.recursion(0, cs);
  const auto partial_N = partial_row_sums(model, N);
  const double c_N = c.at(N);

  auto pass = [&](const std::vector<long double>& rhs, std::optional<double> hint) {
    std::vector<ScaledReal> fs(N);
    for (std::size_t j = 0; j < N; ++j) fs[j] = ScaledReal(static_cast<double>(rhs[j]));
    const auto A = table.recursion(0, fs);
    const double f_N = static_cast<double>(rhs[N]);
    ScaledSum kappa, rho;
    double kappa_scale = std::abs(c_N), rho_scale = std::abs(f_N);
    kappa.add(ScaledReal(c_N));
    rho.add(ScaledReal(f_N));
    for (std::size_t k = 0; k < N; ++k) {
      const ScaledReal q(partial_N[k] - c_N);
      const ScaledReal qb = q * B[k], qa = q * A[k];
      kappa.add(qb);
      rho.add(qa);
      kappa_scale += std::abs(qb.to_double());
      rho_scale += std::abs(qa.to_double());
    }
    FinitePass out{{}, resolve_boundary(kappa.value(), kappa_scale, rho.value(), rho_scale, hint, "g0")};
    const ScaledReal g0(out.boundary.anchor);
    out.g.resize(N + 1);
    ScaledSum g;
    g.add(g0);
    out.g[0] = out.boundary.anchor;
    for (std::size_t k = 0; k < N; ++k) {
      g.add(A[k] - g0 * B[k]);
      out.g[k + 1] = g.value().to_double();
    }
    return out;
  };

  auto residual = [&](const std::vector<long double>& g) {
    RowResidual res{std::vector<long double>(N + 1), std::vector<long double>(N + 1)};
    for (std::size_t i = 0; i <= N; ++i) {
      const RateRow& row = model.row(i);
      const long double gi = g[i];
      long double omega = static_cast<long double>(c.at(i)) * gi;
      long double scale = std::abs(omega) + std::abs(static_cast<long double>(f[i]));
      if (i < N) {
        const long double t = static_cast<long double>(row.up()) * (g[i + 1] - gi);
        omega += t;
        scale += std::abs(row.up() * g[i + 1]) + std::abs(row.up() * gi);
      }
      for (const auto& d : row.down()) {
        omega += static_cast<long double>(d.rate) * (g[d.to] - gi);
        scale += std::abs(d.rate * g[d.to]) + std::abs(d.rate * gi);
      }
      res.r[i] = f[i] - omega;
      res.scale[i] = scale;
    }
    return res;
  };

  return refine(pass, residual, f.first(N + 1), g0_hint, N);
}

std::vector<std::vector<ScaledReal>> single_death_f_table(const SingleDeathModel& model) {
  const std::size_t N = model.last();
  // suffix[n][k] = sum_{j>=k} q_nj for k > n
  std::vector<std::vector<double>> tilted(N + 1, std::vector<double>(N + 2, 0.0));
  for (std::size_t n = 0; n <= N; ++n) {
    double running = 0.0;
    for (std::size_t k = N; k > n; --k) {
      running += model.rate(n, k);
      tilted[n][k] = running - model.killing(n);
    }
  }
  std::vector<std::vector<ScaledReal>> table(N + 1);
  for (std::size_t i = 0; i <= N; ++i) {
    table[i].assign(i + 1, ScaledReal{});
    table[i][i] = ScaledReal(1.0);
    for (std::size_t n = i; n-- > 1;) {
      ScaledSum acc;
      for (std::size_t k = n + 1; k <= i; ++k) {
        if (tilted[n][k] != 0.0) acc.add(ScaledReal(tilted[n][k]) * table[i][k]);
      }
      table[i][n] = acc.value() / ScaledReal(model.down(n));
    }
  }
  return table;
}

namespace {

// A_k = sum_{j>=k} F~_k^(j) src_j / q_{j,j-1} for k = 1..N (index 0 unused).
std::vector<ScaledReal> single_death_sums(const SingleDeathModel& model,
                                          const std::vector<std::vector<ScaledReal>>& table,
                                          std::span<const double> src) {
  const std::size_t N = model.last();
  std::vector<ScaledReal> out(N + 1);
  for (std::size_t k = 1; k <= N; ++k) {
    ScaledSum acc;
    for (std::size_t j = k; j <= N; ++j) {
      if (src[j] != 0.0) acc.add(table[j][k] * ScaledReal(src[j] / model.down(j)));
    }
    out[k] = acc.value();
  }
  return out;
}

}  // namespace

FiniteSolution solve_poisson_single_death_finite(const SingleDeathModel& model, std::span<const double> f,
                                                 std::optional<double> gN_hint) {
  const std::size_t N = model.last();
  if (N < 1) throw UsageError("finite state space needs N >= 1");
  if (f.size() < N + 1) throw UsageError("f needs N+1 entries");
  const auto table = single_death_f_table(model);
  const auto B = single_death_sums(model, table, model.c());

  const double c0 = model.killing(0);
  std::vector<double> tilted0(N + 1, 0.0);
  double running = 0.0;
  for (std::size_t k = N; k >= 1; --k) {
    running += model.rate(0, k);
    tilted0[k] = running - c0;
  }

  auto pass = [&](const std::vector<long double>& rhs, std::optional<double> hint) {
    std::vector<double> src(rhs.begin(), rhs.end());
    const auto A = single_death_sums(model, table, src);
    ScaledSum kappa, rho;
    double kappa_scale = std::abs(c0), rho_scale = std::abs(src[0]);
    kappa.add(ScaledReal(c0));
    rho.add(ScaledReal(src[0]));
    for (std::size_t k = 1; k <= N; ++k) {
      const ScaledReal q(tilted0[k]);
      const ScaledReal qb = q * B[k], qa = q * A[k];
      kappa.add(qb);
      rho.add(qa);
      kappa_scale += std::abs(qb.to_double());
      rho_scale += std::abs(qa.to_double());
    }
    FinitePass out{{}, resolve_boundary(kappa.value(), kappa_scale, rho.value(), rho_scale, hint, "g_N")};
    const ScaledReal gN(out.boundary.anchor);
    out.g.assign(N + 1, 0.0L);
    ScaledSum g;
    g.add(gN);
    out.g[N] = out.boundary.anchor;
    for (std::size_t k = N; k >= 1; --k) {
      g.add(A[k] - gN * B[k]);
      out.g[k - 1] = g.value().to_double();
    }
    return out;
  };

  auto residual = [&](const std::vector<long double>& g) {
    RowResidual res{std::vector<long double>(N + 1), std::vector<long double>(N + 1)};
    for (std::size_t i = 0; i <= N; ++i) {
      const auto& row = model.row(i);
      const long double gi = g[i];
      long double omega = static_cast<long double>(model.killing(i)) * gi;
      long double scale = std::abs(omega) + std::abs(static_cast<long double>(f[i]));
      if (i > 0) {
        omega += static_cast<long double>(row.down) * (g[i - 1] - gi);
        scale += std::abs(row.down * g[i - 1]) + std::abs(row.down * gi);
      }
      for (const auto& [j, r] : row.up) {
        omega += static_cast<long double>(r) * (g[j] - gi);
        scale += std::abs(r * g[j]) + std::abs(r * gi);
      }
      res.r[i] = f[i] - omega;
      res.scale[i] = scale;
    }
    return res;
  };

  return refine(pass, residual, f.first(N + 1), gN_hint, 0);
}

std::vector<double> locally_harmonic_profile(const SingleBirthModel& model, const Coefficients& c, std::size_t N) {
  std::vector<double> g(N + 1, 1.0);
  if (N == 0) return g;
  model.require_rows_through(N - 1);
  const SequenceTable table(model, c, N - 1, {.full_triangle = false, .execution = Execution::Serial});
  std::vector<ScaledReal> cs(N);
  for (std::size_t j = 0; j < N; ++j) cs[j] = ScaledReal(table.c(j));
  const auto B = table.recursion(0, cs);
  ScaledSum acc;
  acc.add(ScaledReal(1.0));
  for (std::size_t k = 0; k < N; ++k) {
    acc.add(-B[k]);
    g[k + 1] = acc.value().to_double();
  }
  return g;
}

std::vector<double> locally_harmonic_profile_single_death(const SingleDeathModel& model) {
  const std::size_t N = model.last();
  std::vector<double> g(N + 1, 1.0);
  if (N == 0) return g;
  const auto table = single_death_f_table(model);
  const auto B = single_death_sums(model, table, model.c());
  ScaledSum acc;
  acc.add(ScaledReal(1.0));
  for (std::size_t k = N; k >= 1; --k) {
    acc.add(-B[k]);
    g[k - 1] = acc.value().to_double();
  }
  return g;
}

}  // namespace sbp
