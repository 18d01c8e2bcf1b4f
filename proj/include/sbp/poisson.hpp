#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sbp/model.hpp"
#include "sbp/scaled_real.hpp"
#include "sbp/sequences.hpp"

namespace sbp {

/// h_n = (sum_{k<n} alpha_{nk} h_k + f_n) / beta_n for n = 0..size-1.
struct TriangularSystem {
  std::vector<std::vector<double>> alpha;  // alpha[n] has n entries
  std::vector<double> beta;                // empty means beta = 1
  std::vector<double> f;

  std::size_t size() const { return f.size(); }
  double divisor(std::size_t n) const { return beta.empty() ? 1.0 : beta[n]; }
  /// Throws UsageError on inconsistent sizes or a zero divisor.
  void validate() const;
};

/// Forward substitution.
std::vector<double> solve_triangular(const TriangularSystem& system);

/// gamma_{nk} for n = k..size-1 (indexed by n - k) from
/// gamma_kk = 1, gamma_nk = (1/beta_n) sum_{j=k}^{n-1} alpha_nj gamma_jk.
std::vector<double> gamma_column(const TriangularSystem& system, std::size_t k);

/// Full table: gamma[n][k] for k <= n, built column by column from the forward form.
std::vector<std::vector<double>> gamma_table(const TriangularSystem& system);

/// The same table from the backward form gamma_nk = sum_{j=k+1}^{n} gamma_nj alpha_jk / beta_j,
/// filled row by row from the diagonal down.
std::vector<std::vector<double>> gamma_table_alternative(const TriangularSystem& system);

/// h_n = sum_k gamma_nk f_k / beta_k.
std::vector<double> solve_triangular_gamma(const TriangularSystem& system);

/// Omega g = f on {0, 1, ...} with Omega = Q + c, truncated at N.
struct PoissonProblem {
  SingleBirthModel model;
  Coefficients c;
  std::vector<double> f;  // at least N entries
  double g0 = 0.0;
  std::size_t N = 0;
};

enum class PoissonMethod {
  /// Streaming recursion for the increments (the unified expression).
  Recursion,
  /// Double sum over an explicit F~ triangle.
  Triangle,
};

struct PoissonSolution {
  std::vector<ScaledReal> g;  // g_0..g_N
  std::vector<ScaledReal> w;  // w_k = g_{k+1} - g_k, k = 0..N-1
  /// max_{i<N} |(Omega g)_i - f_i|; NaN when g is not representable as double.
  double residual = 0.0;
  bool representable = true;

  /// g as doubles; throws NumericOverflow when not representable.
  std::vector<double> values() const;
};

/// Throws HorizonExceeded if row N is missing.
PoissonSolution solve_poisson(const PoissonProblem& problem, PoissonMethod method = PoissonMethod::Recursion,
                              Execution execution = Execution::Parallel);

/// max over 0 <= i <= N-1 of |(Omega g)_i - f_i| by direct substitution.
double poisson_residual(const SingleBirthModel& model, const Coefficients& c, std::span<const double> f,
                        std::span<const double> g, std::size_t N);

enum class BoundaryStatus {
  /// The boundary equation fixed g_0 (single birth) or g_N (single death).
  Determined,
  /// Any anchor value solves the boundary equation; the caller's value was used.
  Underdetermined,
};

struct FiniteSolution {
  std::vector<double> g;
  bool boundary_ok = false;
  BoundaryStatus status = BoundaryStatus::Determined;
  /// g_0 for single birth, g_N for single death.
  double anchor = 0.0;
  /// |boundary equation defect| relative to its scale.
  double boundary_defect = 0.0;
  std::string notice;
};

/// Omega g = f on {0..N}; row N's birth rate is ignored.  `f` needs N+1 entries.
/// When the boundary equation determines g_0 any `g0_hint` is ignored (and a
/// notice says so); otherwise the hint (default 0) is used.
/// Throws DegenerateBoundary when the boundary equation reads 0 = nonzero.
FiniteSolution solve_poisson_finite(const SingleBirthModel& model, const Coefficients& c, std::span<const double> f,
                                    std::size_t N, std::optional<double> g0_hint = std::nullopt);

/// Omega g = f on {0..model.last()} for a single death matrix with killing model.c().
FiniteSolution solve_poisson_single_death_finite(const SingleDeathModel& model, std::span<const double> f,
                                                 std::optional<double> gN_hint = std::nullopt);

/// g with g_0 = 1 and (Omega g)_i = 0 for i < N:  g_n = 1 - sum_{k<n} sum_{j<=k} F~_k^(j) c_j / q_{j,j+1}.
std::vector<double> locally_harmonic_profile(const SingleBirthModel& model, const Coefficients& c, std::size_t N);

/// g with g_N = 1 and (Omega g)_i = 0 for i >= 1.
std::vector<double> locally_harmonic_profile_single_death(const SingleDeathModel& model);

/// Downward F~ triangle of a single death matrix: result[i][n] = F~_n^(i) for n <= i.
std::vector<std::vector<ScaledReal>> single_death_f_table(const SingleDeathModel& model);

}  // namespace sbp
