#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles/dense.hpp"
#include "oracles/random_models.hpp"
#include "sbp/errors.hpp"
#include "sbp/poisson.hpp"

using namespace sbp;

namespace {

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double scale = 0.0, worst = 0.0;
  for (double x : b) scale = std::max(scale, std::abs(x));
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return scale > 0.0 ? worst / scale : worst;
}

}  // namespace

TEST_SUITE("triangular") {

TEST_CASE("hand examples") {
  TriangularSystem s{{{}, {0.0}, {0.0, 0.0}}, {}, {3, 7, 9}};
  CHECK(solve_triangular(s) == std::vector<double>{3, 7, 9});
  TriangularSystem t{{{}, {2.0}}, {}, {1, 1}};
  CHECK(solve_triangular(t) == std::vector<double>{1, 3});
  const auto g = gamma_table(s);
  CHECK(g[2][0] == 0.0);
  CHECK(g[2][2] == 1.0);
  CHECK_THROWS_AS(solve_triangular(TriangularSystem{{{}, {}}, {}, {1, 1}}), UsageError);
  CHECK_THROWS_AS(solve_triangular(TriangularSystem{{{}}, {0.0}, {1}}), UsageError);
}

TEST_CASE("gamma representation matches forward substitution") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = oracle::random_triangular(rng, 25);
    const auto a = solve_triangular(s);
    const auto b = solve_triangular_gamma(s);
    CHECK(max_rel_diff(b, a) <= 1e-12);
    const auto fwd = gamma_table(s);
    const auto alt = gamma_table_alternative(s);
    for (std::size_t n = 0; n < 25; ++n)
      for (std::size_t k = 0; k <= n; ++k)
        CHECK(std::abs(fwd[n][k] - alt[n][k]) <= 1e-12 * std::max(1.0, std::abs(fwd[n][k])));
  }
}

TEST_CASE("gamma from the sequence coefficients is the F column") {
  const auto m = model_uniform_catastrophe(1, 1, 1);
  const SequenceTable t(m, Coefficients::zero(), 20);
  TriangularSystem s;
  for (std::size_t n = 0; n <= 20; ++n) {
    s.alpha.emplace_back(t.partial(n).begin(), t.partial(n).end());
    s.beta.push_back(t.up(n));
    s.f.push_back(0.0);
  }
  const auto col = gamma_column(s, 0);
  for (std::size_t n = 0; n <= 20; ++n) CHECK(col[n] == doctest::Approx(t.f0()[n].to_double()).epsilon(1e-13));
}

TEST_CASE("comparison inequality") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = oracle::random_triangular(rng, 1 + trial % 25);
    const auto g = gamma_table(s);
    const std::size_t n_max = s.size();
    for (std::size_t n = 0; n < n_max; ++n)
      for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t j = 0; j <= i; ++j)
          CHECK(g[n][j] >= g[n][i] * g[i][j] * (1.0 - 1e-12));
  }
}

}

TEST_SUITE("poisson") {

TEST_CASE("constants are harmonic") {
  PoissonProblem p{model_uniform_catastrophe(1, 1, 1), Coefficients::zero(), std::vector<double>(30, 0.0), 5.0, 30};
  const auto s = solve_poisson(p);
  for (const auto& v : s.g) CHECK(v.to_double() == 5.0);
  CHECK(s.residual == 0.0);
}

TEST_CASE("recurrence preset gives partial sums of F") {
  const auto m = model_uniform_catastrophe(1, 1, 1);
  std::vector<double> f(21, 0.0);
  for (std::size_t i = 1; i <= 20; ++i) f[i] = m.rate(i, 0);
  const auto s = solve_poisson({m, Coefficients::zero(), f, 1.0, 20});
  const SequenceTable t(m, Coefficients::zero(), 20);
  double partial = 0.0;
  for (std::size_t n = 1; n <= 20; ++n) {
    partial += t.f0()[n - 1].to_double();
    CHECK(s.g[n].to_double() == doctest::Approx(partial).epsilon(1e-12));
  }
}

TEST_CASE("uniqueness preset gives 1 + lambda sum m") {
  const double lambda = 0.3;
  const auto m = model_uniform_catastrophe(1, 2, 1);
  const auto s = solve_poisson({m, Coefficients::constant(-lambda), std::vector<double>(25, 0.0), 1.0, 25});
  const SequenceTable t(m, Coefficients::constant(-lambda), 25);
  double partial = 0.0;
  for (std::size_t n = 1; n <= 25; ++n) {
    partial += t.m()[n - 1].to_double();
    CHECK(s.g[n].to_double() == doctest::Approx(1.0 + lambda * partial).epsilon(1e-12));
  }
  CHECK(s.residual <= 1e-9 * std::abs(s.g[25].to_double()));
}

TEST_CASE("triangle and recursion methods agree") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = oracle::random_single_birth(rng, 41);
    const auto f = oracle::random_vector(rng, 40, -1, 1);
    const PoissonProblem p{m, Coefficients::constant(-0.1), f, 0.5, 40};
    const auto a = solve_poisson(p, PoissonMethod::Recursion).values();
    const auto b = solve_poisson(p, PoissonMethod::Triangle).values();
    CHECK(max_rel_diff(a, b) <= 1e-12);
  }
}

TEST_CASE("residual detects corruption") {
  std::mt19937_64 rng(31);
  const auto m = oracle::random_single_birth(rng, 21);
  const auto f = oracle::random_vector(rng, 20, -1, 1);
  const auto s = solve_poisson({m, Coefficients::constant(-0.1), f, 0.3, 20});
  auto g = s.values();
  CHECK(poisson_residual(m, Coefficients::constant(-0.1), f, g, 20) <= 1e-9);
  g[7] += 1.0;
  CHECK(poisson_residual(m, Coefficients::constant(-0.1), f, g, 20) >= 1.0);
}

TEST_CASE("re-solving with the same g0 is deterministic") {
  std::mt19937_64 rng(37);
  const auto m = oracle::random_single_birth(rng, 31);
  const auto f = oracle::random_vector(rng, 30, -1, 1);
  const PoissonProblem p{m, Coefficients::constant(-0.05), f, -0.7, 30};
  CHECK(solve_poisson(p).g == solve_poisson(p).g);
}

TEST_CASE("finite single birth matches dense solve") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t N = 2 + trial % 18;
    const auto m = oracle::random_single_birth(rng, N + 1);
    auto c = oracle::random_vector(rng, N + 1, -0.5, 0.0);
    c[trial % (N + 1)] = -0.3;
    const auto f = oracle::random_vector(rng, N + 1, -1, 1);
    const auto coeff = Coefficients::values(c);
    const auto sol = solve_poisson_finite(m, coeff, f, N);
    const auto ref = oracle::dense_solve(oracle::dense_omega(m, coeff, N), f);
    CHECK(sol.status == BoundaryStatus::Determined);
    CHECK(sol.boundary_ok);
    CHECK(max_rel_diff(sol.g, ref) <= 1e-10);

    const auto zero = solve_poisson_finite(m, coeff, std::vector<double>(N + 1, 0.0), N, 3.0);
    for (double v : zero.g) CHECK(v == 0.0);
    CHECK_FALSE(zero.notice.empty());
  }
}

TEST_CASE("finite single birth without killing is underdetermined") {
  const auto m = model_uniform_catastrophe(1, 1, 1);
  const auto sol = solve_poisson_finite(m, Coefficients::zero(), std::vector<double>(6, 0.0), 5, 2.5);
  CHECK(sol.status == BoundaryStatus::Underdetermined);
  CHECK(sol.boundary_ok);
  for (double v : sol.g) CHECK(v == 2.5);
}

TEST_CASE("degenerate boundary") {
  // c = 0, f = 1 everywhere: summing Omega g = f against the stationary law gives 0 = 1.
  const auto m = model_uniform_catastrophe(1, 1, 1);
  CHECK_THROWS_AS(solve_poisson_finite(m, Coefficients::zero(), std::vector<double>(6, 1.0), 5), DegenerateBoundary);
}

TEST_CASE("locally harmonic profile is increasing under killing") {
  std::mt19937_64 rng(43);
  const auto m = oracle::random_single_birth(rng, 16);
  const auto c = Coefficients::values(oracle::random_vector(rng, 16, -0.5, 0.0));
  const auto g = locally_harmonic_profile(m, c, 15);
  CHECK(g[0] == 1.0);
  for (std::size_t n = 1; n <= 15; ++n) CHECK(g[n] >= g[n - 1]);
  CHECK(poisson_residual(m, c, std::vector<double>(15, 0.0), g, 15) <= 1e-9 * g.back());
}

TEST_CASE("single death matches dense solve") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t N = 2 + trial % 18;
    auto sd = oracle::random_single_death(rng, N, -0.5, 0.0);
    const auto f = oracle::random_vector(rng, N + 1, -1, 1);
    const auto sol = solve_poisson_single_death_finite(sd, f);
    const auto ref = oracle::dense_solve(oracle::dense_omega(sd), f);
    CHECK(sol.boundary_ok);
    CHECK(max_rel_diff(sol.g, ref) <= 1e-10);
  }
}

TEST_CASE("single death hand system") {
  // N = 2: rows {0: up 1 -> 1}, {1: down 1, up 2 -> 2}, {2: down 2}; c = (-1, 0, 0)
  std::vector<SingleDeathModel::Row> rows(3);
  rows[0].up[1] = 1.0;
  rows[1].down = 1.0;
  rows[1].up[2] = 2.0;
  rows[2].down = 2.0;
  const SingleDeathModel sd(rows, {-1.0, 0.0, 0.0});
  const std::vector<double> f{1.0, 0.0, 0.0};
  // Omega = [[-2,1,0],[1,-3,2],[0,2,-2]]: g = (-1, -1, -1)
  const auto sol = solve_poisson_single_death_finite(sd, f);
  for (double v : sol.g) CHECK(v == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("single death without killing and locally harmonic profile") {
  std::mt19937_64 rng(53);
  auto free_sd = oracle::random_single_death(rng, 8, 0.0, 0.0);
  const auto sol = solve_poisson_single_death_finite(free_sd, std::vector<double>(9, 0.0), 4.0);
  CHECK(sol.status == BoundaryStatus::Underdetermined);
  for (double v : sol.g) CHECK(v == 4.0);

  auto sd = oracle::random_single_death(rng, 12, -0.5, 0.0);
  const auto g = locally_harmonic_profile_single_death(sd);
  CHECK(g[12] == 1.0);
  for (std::size_t n = 1; n <= 12; ++n) CHECK(g[n - 1] >= g[n]);
  const auto omega = oracle::dense_omega(sd);
  for (Eigen::Index i = 1; i <= 12; ++i) {
    double r = 0.0;
    for (Eigen::Index j = 0; j <= 12; ++j) r += omega(i, j) * g[static_cast<std::size_t>(j)];
    CHECK(std::abs(r) <= 1e-9 * g[0]);
  }
}

}
