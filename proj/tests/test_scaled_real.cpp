#include <cmath>
#include <random>

#include "doctest.h"
#include "sbp/errors.hpp"
#include "sbp/scaled_real.hpp"

using sbp::ScaledReal;
using sbp::ScaledSum;

TEST_SUITE("scaled_real") {

TEST_CASE("round trip through double") {
  for (double x : {1.0, -2.5, 1e-300, 3.7e250, -0.125, 12345.678}) {
    CHECK(ScaledReal(x).to_double() == x);
  }
  CHECK(ScaledReal(0.0).is_zero());
  CHECK(ScaledReal(0.0).sign() == 0);
  CHECK(ScaledReal(-3.0).sign() == -1);
}

TEST_CASE("arithmetic matches double to 12 digits inside e^600") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mag(-250.0, 250.0);
  std::uniform_int_distribution<int> sgn(0, 1);
  for (int t = 0; t < 2000; ++t) {
    const double a = (sgn(rng) ? 1 : -1) * std::exp(mag(rng));
    const double b = (sgn(rng) ? 1 : -1) * std::exp(mag(rng));
    const ScaledReal sa(a), sb(b);
    CHECK((sa * sb).to_double() == doctest::Approx(a * b).epsilon(1e-12));
    CHECK((sa / sb).to_double() == doctest::Approx(a / b).epsilon(1e-12));
    const double s = a + b;
    if (std::abs(s) > 1e-6 * std::max(std::abs(a), std::abs(b))) {
      CHECK((sa + sb).to_double() == doctest::Approx(s).epsilon(1e-12));
    }
  }
}

TEST_CASE("products far beyond double range keep full precision") {
  ScaledReal p(1.0);
  double log_sum = 0.0;
  for (int k = 1; k <= 2000; ++k) {
    p *= ScaledReal(1.0 + k);
    log_sum += std::log(1.0 + k);
  }
  CHECK_FALSE(p.representable());
  CHECK(p.log_magnitude() == doctest::Approx(log_sum).epsilon(1e-13));
  const ScaledReal back = p / p;
  CHECK(back.to_double() == 1.0);
  CHECK(p.to_string().rfind("+e^", 0) == 0);
}

TEST_CASE("from_log and log_magnitude agree") {
  const ScaledReal x = ScaledReal::from_log(-1, 12345.25);
  CHECK(x.sign() == -1);
  CHECK(x.log_magnitude() == doctest::Approx(12345.25).epsilon(1e-14));
  CHECK_THROWS_AS(ScaledReal::from_log(1, 2e6), sbp::NumericOverflow);
}

TEST_CASE("overflow past 1e6 in log magnitude throws") {
  const ScaledReal big = ScaledReal::from_log(1, 6e5);
  CHECK_THROWS_AS(big * big, sbp::NumericOverflow);
  CHECK_THROWS_AS(ScaledReal(1.0) / ScaledReal(0.0), sbp::NumericOverflow);
}

TEST_CASE("ordering is sign and magnitude aware") {
  const ScaledReal huge = ScaledReal::from_log(1, 5000.0);
  CHECK(ScaledReal(-1.0) < ScaledReal(0.0));
  CHECK(ScaledReal(2.0) < huge);
  CHECK(-huge < ScaledReal(-2.0));
  CHECK(ScaledReal(3.0) == ScaledReal(3.0));
}

TEST_CASE("compensated sum recovers cancellation") {
  ScaledSum s;
  s.add(ScaledReal(1e16));
  for (int k = 0; k < 1000; ++k) s.add(ScaledReal(1.0));
  s.add(ScaledReal(-1e16));
  CHECK(s.value().to_double() == doctest::Approx(1000.0).epsilon(1e-12));

  ScaledSum t;
  t.add(ScaledReal(1.0));
  t.add(ScaledReal::from_log(1, 3000.0));
  CHECK(t.value().log_magnitude() == doctest::Approx(3000.0).epsilon(1e-14));
  ScaledSum empty;
  CHECK(empty.value().is_zero());
}

TEST_CASE("log distance") {
  CHECK(sbp::log_distance(ScaledReal(2.0), ScaledReal(2.0)) == 0.0);
  CHECK(sbp::log_distance(ScaledReal(std::exp(1.0)), ScaledReal(1.0)) == doctest::Approx(1.0));
  CHECK(std::isinf(sbp::log_distance(ScaledReal(1.0), ScaledReal(-1.0))));
}

}
