#include "oracles/random_models.hpp"

namespace sbp::oracle {

SingleBirthModel random_single_birth(std::mt19937_64& rng, std::size_t rows, const RandomModelShape& shape) {
  std::uniform_real_distribution<double> up(shape.up_min, shape.up_max);
  std::uniform_real_distribution<double> rate(0.0, shape.down_max);
  std::bernoulli_distribution pick(shape.down_density);
  std::vector<RateRow> out;
  out.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    std::map<std::size_t, double> down;
    for (std::size_t j = 0; j < i; ++j) {
      if (pick(rng)) down[j] = rate(rng);
    }
    if (shape.connect_down && i > 0 && down.empty()) down[i - 1] = 0.1 + rate(rng);
    out.emplace_back(up(rng), down);
  }
  return SingleBirthModel::tabulated(std::move(out), "random");
}

SingleBirthModel random_ergodic_single_birth(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double up = 0.5 + u(rng);
  const double step = up + 0.5 + u(rng);
  const double jump2 = u(rng) < 0.5 ? u(rng) : 0.0;
  const double catastrophe = 0.5 * u(rng);
  const double q01 = 0.5 + u(rng);
  auto row = [=](std::size_t i) {
    if (i == 0) return RateRow(q01, std::map<std::size_t, double>{});
    std::map<std::size_t, double> down{{i - 1, step}};
    if (i >= 2) {
      down[i - 2] += jump2;
      down[0] += catastrophe;
    }
    return RateRow(up, down);
  };
  return SingleBirthModel::generated(row, std::nullopt, "random ergodic");
}

SingleDeathModel random_single_death(std::mt19937_64& rng, std::size_t N, double c_min, double c_max) {
  std::uniform_real_distribution<double> down(0.5, 2.0);
  std::uniform_real_distribution<double> rate(0.0, 1.0);
  std::uniform_real_distribution<double> cd(c_min, c_max);
  std::bernoulli_distribution pick(0.3);
  std::vector<SingleDeathModel::Row> rows(N + 1);
  std::vector<double> c(N + 1);
  for (std::size_t i = 0; i <= N; ++i) {
    if (i > 0) rows[i].down = down(rng);
    for (std::size_t j = i + 1; j <= N; ++j) {
      if (pick(rng) || j == i + 1) rows[i].up[j] = 0.1 + rate(rng);
    }
    c[i] = cd(rng);
  }
  return SingleDeathModel(std::move(rows), std::move(c));
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

TriangularSystem random_triangular(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> a(0.0, 1.0);
  std::uniform_real_distribution<double> b(0.5, 2.0);
  std::bernoulli_distribution pick(0.5);
  TriangularSystem s;
  s.alpha.resize(n);
  s.beta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.alpha[i].assign(i, 0.0);
    for (std::size_t k = 0; k < i; ++k) {
      if (pick(rng)) s.alpha[i][k] = a(rng);
    }
    s.beta[i] = b(rng);
  }
  s.f = random_vector(rng, n, -1.0, 1.0);
  return s;
}

}  // namespace sbp::oracle
