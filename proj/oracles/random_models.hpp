#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "sbp/model.hpp"
#include "sbp/poisson.hpp"

namespace sbp::oracle {

struct RandomModelShape {
  double up_min = 1.0;
  double up_max = 2.0;
  /// Chance that a given lower state receives a down rate.
  double down_density = 0.2;
  double down_max = 1.0;
  /// Always add q_{i,i-1} so that every state can reach 0.
  bool connect_down = true;
};

SingleBirthModel random_single_birth(std::mt19937_64& rng, std::size_t rows, const RandomModelShape& shape = {});

/// Unbounded model with a random birth rate, a dominant step down, an optional
/// two-step jump and a catastrophe to 0, all constant from row 2 on.  Positive
/// recurrent for every draw.
SingleBirthModel random_ergodic_single_birth(std::mt19937_64& rng);

/// Rows 0..N with q_{i,i-1} in [down_min, down_max], sparse upward rates and c in [c_min, c_max].
SingleDeathModel random_single_death(std::mt19937_64& rng, std::size_t N, double c_min, double c_max);

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi);

/// Random system with alpha >= 0 (sparse) and beta > 0.
TriangularSystem random_triangular(std::mt19937_64& rng, std::size_t n);

}  // namespace sbp::oracle
