#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles/dense.hpp"
#include "oracles/random_models.hpp"
#include "sbp/criteria.hpp"
#include "sbp/errors.hpp"

using namespace sbp;

namespace {

SingleBirthModel birth_death(double up, double down) {
  return model_birth_death([up](std::size_t) { return up; }, [down](std::size_t) { return down; });
}

SingleBirthModel column(double power) {
  return model_constant_column([](std::size_t) { return 1.0; },
                               [power](std::size_t n) { return std::pow(static_cast<double>(n + 1), power); });
}

std::vector<Quad> quad_terms(std::size_t n, double (*term)(std::size_t)) {
  std::vector<Quad> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(term(i));
  return out;
}

}  // namespace

TEST_SUITE("criteria") {

TEST_CASE("kummer test on textbook series") {
  std::vector<double> u, v;
  for (int n = 5; n <= 60; ++n) {
    u.push_back(std::pow(2.0, -n));
    v.push_back(n);
  }
  CHECK(kummer_test(u, v).conclusion == SeriesConclusion::Converges);

  CHECK_THROWS_AS(kummer_test(u, std::vector<double>(3, 1.0)), UsageError);
  v.clear();
  for (int n = 1; n <= 60; ++n) v.push_back(n);
  std::vector<double> harmonic;
  for (int n = 1; n <= 60; ++n) harmonic.push_back(1.0 / n);
  const auto h = kummer_test(harmonic, v);
  CHECK(h.conclusion == SeriesConclusion::Inconclusive);
  CHECK(h.kappa.value.value == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<double> square;
  for (int n = 1; n <= 60; ++n) square.push_back(1.0 / (static_cast<double>(n) * n));
  const auto sq = kummer_test(square, v);
  CHECK(sq.conclusion == SeriesConclusion::Converges);
  CHECK(sq.raabe > 1.0);

  std::vector<double> ones(60, 1.0);
  CHECK(kummer_test(ones, v).conclusion == SeriesConclusion::Diverges);
}

TEST_CASE("series classification and tails") {
  CriteriaOptions opts;
  const auto geo = classify_series(quad_terms(200, [](std::size_t n) { return std::pow(0.5, n); }), opts);
  REQUIRE(geo.conclusion == SeriesConclusion::Converges);
  CHECK(geo.partial_sum + geo.tail_estimate == doctest::Approx(2.0).epsilon(1e-15));

  const auto quadratic = classify_series(
      quad_terms(1001, [](std::size_t n) { return 1.0 / ((n + 1.0) * (n + 1.0)); }), opts);
  REQUIRE(quadratic.conclusion == SeriesConclusion::Converges);
  const double zeta2 = M_PI * M_PI / 6.0;
  CHECK(std::abs(quadratic.partial_sum + quadratic.tail_estimate - zeta2) < 1e-5);
  CHECK(quadratic.partial_sum + quadratic.tail_bound >= zeta2 - 1e-12);

  const auto constant = classify_series(quad_terms(1001, [](std::size_t) { return 1.0; }), opts);
  CHECK(constant.conclusion == SeriesConclusion::Diverges);
  const auto harmonic = classify_series(quad_terms(1001, [](std::size_t n) { return 1.0 / (n + 1.0); }), opts);
  CHECK(harmonic.conclusion == SeriesConclusion::Inconclusive);
}

TEST_CASE("uniqueness and recurrence") {
  CHECK(uniqueness(model_uniform_catastrophe(1, 1, 1)).status == Status::Holds);
  CHECK(uniqueness(column(1.0)).status == Status::Holds);
  const auto explosive = uniqueness(column(2.0));
  CHECK(explosive.status == Status::Fails);
  REQUIRE(explosive.diagnostics.kummer.has_value());
  CHECK(*explosive.diagnostics.kummer + 1.0 > 1.0);

  CHECK(recurrence(birth_death(1, 2)).status == Status::Holds);
  CHECK(recurrence(birth_death(1, 1)).status != Status::Fails);
  CHECK(recurrence(birth_death(2, 1)).status == Status::Fails);
}

TEST_CASE("return probability of a transient walk") {
  const auto p = return_probability(birth_death(2, 1));
  REQUIRE(p.resolved_prefix() > 30);
  CHECK(p.values[0].value == doctest::Approx(0.5).epsilon(1e-10));
  for (std::size_t n = 1; n <= 30; ++n) {
    CHECK(p.values[n].value == doctest::Approx(std::pow(0.5, static_cast<double>(n))).epsilon(1e-9));
  }
  const auto sure = return_probability(birth_death(1, 2));
  CHECK(sure.values[7].value == 1.0);
}

TEST_CASE("mean return time against dense oracles") {
  const auto model = birth_death(1, 2);
  const auto r = mean_return_time(model);
  CHECK(r.d.value.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.E.values[0].value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(r.ergodic.status == Status::Holds);
  CHECK(r.strongly_ergodic.status == Status::Fails);

  const auto pi = oracle::stationary_distribution(model, 80);
  CHECK(r.E.values[0].value == doctest::Approx(1.0 / (pi[0] * model.total_rate(0))).epsilon(1e-6));
  const auto hit = oracle::dense_hitting_means(model, 120);
  for (std::size_t n = 1; n <= 20; ++n) {
    REQUIRE(r.E.resolved[n]);
    CHECK(r.E.values[n].value == doctest::Approx(hit[n]).epsilon(1e-8));
  }
}

TEST_CASE("mean return time on the catastrophe example") {
  const auto r = mean_return_time(model_uniform_catastrophe(1, 1, 1));
  CHECK(r.d.value.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.strongly_ergodic.status == Status::Holds);
  REQUIRE(r.sup.has_value());
  CHECK(*r.sup == doctest::Approx(2.0).epsilon(1e-9));
  for (std::size_t n = 1; n <= 50; ++n) CHECK(r.E.values[n].value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("transient models have infinite mean return time") {
  const auto r = mean_return_time(column(2.0));
  CHECK(r.recurrent.status == Status::Fails);
  CHECK(r.ergodic.status == Status::Fails);
  CHECK(r.E.values[3].kind == ExtendedReal::Kind::PosInf);
}

TEST_CASE("first hitting moment equals the mean return time") {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 5; ++trial) {
    const auto model = oracle::random_ergodic_single_birth(rng);
    const auto mean = mean_return_time(model);
    const auto h = hitting_moment(model, 0, 1);
    for (std::size_t n = 0; n <= 40; ++n) {
      REQUIRE(mean.E.resolved[n]);
      CHECK(h.E.values[n].value == doctest::Approx(mean.E.values[n].value).epsilon(1e-8));
    }
  }
}

TEST_CASE("hitting an interior state matches the dense solve") {
  const auto model = model_uniform_catastrophe(1, 1, 1);
  const auto h = hitting_moment(model, 3, 1);
  // E_n tau_3 for n < 3 on the truncated chain: states >= 3 absorbed, so
  // solve Q g = -1 on {0, 1, 2} with g_3 = 0.
  Eigen::MatrixXd a(3, 3);
  a.setZero();
  Eigen::VectorXd b = -Eigen::VectorXd::Ones(3);
  for (std::size_t i = 0; i < 3; ++i) {
    a(i, i) = -model.total_rate(i);
    if (i + 1 < 3) a(i, i + 1) = model.up(i);
    for (const auto& d : model.row(i).down()) a(i, d.to) += d.rate;
  }
  const Eigen::VectorXd g = a.fullPivLu().solve(b);
  for (int n = 0; n < 3; ++n) CHECK(h.E.values[n].value == doctest::Approx(g(n)).epsilon(1e-9));
  CHECK_THROWS_AS(hitting_moment(model, 0, 0), UsageError);
}

TEST_CASE("second moment of the return time") {
  const auto h = hitting_moment(birth_death(1, 2), 0, 2);
  // E_0 sigma_0^2 = 8 for this walk: E_1 tau_0 = 1, E_1 tau_0^2 = 4 (busy period) and
  // sigma_0 = holding time + tau_0 from 1 with a unit-rate holding time.
  CHECK(h.at_target.value == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(hitting_moment(column(2.0), 0, 1).at_target.kind == ExtendedReal::Kind::PosInf);
  CHECK_THROWS_AS(hitting_moment(column(2.0), 0, 2), PreviousOrderInfinite);
}

TEST_CASE("exponential moments and Laplace transforms") {
  const auto model = model_uniform_catastrophe(1, 1, 1);
  const auto e = exp_moment_return(model, 0.5);
  CHECK(e.feasible.status == Status::Holds);
  for (std::size_t n = 1; n <= 40; ++n) CHECK(e.E.values[n].value == doctest::Approx(2.0).epsilon(1e-9));
  for (std::size_t n = 0; n < e.E.resolved_prefix(); ++n) CHECK(e.E.values[n].value >= 1.0);
  CHECK_THROWS_AS(exp_moment_return(model, 1.0), RateBoundViolated);

  const auto l = laplace_return(model_uniform_catastrophe(2, 3, 1), 0.5, {.N = 500});
  CHECK(l.values[0].value == doctest::Approx(8.0 / 15.0).epsilon(1e-9));
  for (std::size_t n = 1; n <= 20; ++n) CHECK(l.values[n].value == doctest::Approx(0.8).epsilon(1e-9));
  for (std::size_t n = 0; n < l.resolved_prefix(); ++n) {
    CHECK(l.values[n].value > 0.0);
    CHECK(l.values[n].value <= 1.0);
  }
  CHECK_THROWS_AS(laplace_return(column(2.0), 0.5), DomainError);
}

TEST_CASE("central difference of the transforms gives the mean") {
  const auto model = model_uniform_catastrophe(1, 1, 1);
  const double h = 1e-5;
  const auto lap = laplace_return(model, h);
  const auto exp = exp_moment_return(model, h);
  const auto mean = mean_return_time(model);
  for (std::size_t n = 0; n <= 10; ++n) {
    const double slope = (lap.values[n].value - exp.E.values[n].value) / (2 * h);
    CHECK(-slope == doctest::Approx(mean.E.values[n].value).epsilon(1e-4));
  }
}

TEST_CASE("life time moments and transforms") {
  const auto model = column(2.0);
  const auto m1 = lifetime_moment(model, 1);
  const auto plain = oracle::plain_m(model, Coefficients::zero(), 1000);
  for (std::size_t n = 0; n < 20; ++n) {
    CHECK(m1.values[n].value - m1.values[n + 1].value == doctest::Approx(static_cast<double>(plain[n])).epsilon(1e-10));
    CHECK(m1.values[n].value > m1.values[n + 1].value);
  }
  long double head = 0;
  for (auto x : plain) head += x;
  CHECK(m1.values[0].value >= static_cast<double>(head));
  CHECK(m1.values[0].value == doctest::Approx(static_cast<double>(head)).epsilon(1e-2));
  CHECK_THROWS_AS(lifetime_moment(model_uniform_catastrophe(1, 1, 1), 1), NotExplosive);

  const auto lap = lifetime_transforms(model, 1.0, TransformDirection::Laplace);
  const auto exp = lifetime_transforms(model, 0.1, TransformDirection::ExpMoment);
  for (std::size_t n = 0; n < 20; ++n) {
    CHECK(lap.values[n].value > 0.0);
    CHECK(lap.values[n].value <= 1.0);
    CHECK(lap.values[n].value < lap.values[n + 1].value);
    CHECK(exp.values[n].value >= 1.0);
  }
  CHECK_THROWS_AS(lifetime_transforms(model, 10.0, TransformDirection::ExpMoment), FeasibilityViolated);
}

TEST_CASE("decay profile solves the shifted equation") {
  const auto model = model_uniform_catastrophe(1, 1, 1);
  const double lambda = 0.3;
  const auto p = decay_profile(model, lambda, 1.0, 30);
  for (std::size_t i = 0; i < 30; ++i) {
    double qg = model.up(i) * (p.g[i + 1] - p.g[i]);
    for (const auto& d : model.row(i).down()) qg += d.rate * (p.g[d.to] - p.g[i]);
    double scale = std::abs(p.g[i]);
    for (std::size_t j = 0; j <= i + 1; ++j) scale = std::max(scale, std::abs(p.g[j]));
    CHECK(std::abs(qg + lambda * p.g[i]) <= 1e-9 * std::max(1.0, scale) * model.total_rate(i));
  }
}

TEST_CASE("MZ condition") {
  const auto holds = mz_sufficient_condition(model_uniform_catastrophe(1, 1, 1));
  CHECK(holds.sufficient.status == Status::Holds);
  CHECK(holds.M.value.is_finite());
  const auto bd = mz_sufficient_condition(birth_death(1, 2));
  CHECK(bd.sufficient.status == Status::Holds);
  CHECK(bd.M.value.value == doctest::Approx(2.0).epsilon(1e-6));
  const auto fails = mz_sufficient_condition(model_constant_column([](std::size_t) { return 1.0; },
                                                                   [](std::size_t n) { return 2.0 * (n + 1); }));
  CHECK(fails.inner.conclusion == SeriesConclusion::Diverges);
  CHECK(fails.sufficient.status == Status::Fails);
  CHECK(fails.M.value.kind == ExtendedReal::Kind::PosInf);
}

TEST_CASE("results are deterministic") {
  const auto model = birth_death(1, 2);
  const auto a = mean_return_time(model);
  const auto b = mean_return_time(model);
  CHECK(a.E == b.E);
  CHECK(a.d == b.d);
  CHECK(uniqueness(model) == uniqueness(model));
}

}  // TEST_SUITE
