#include <benchmark/benchmark.h>

#include <vector>

#include "sbp/model.hpp"
#include "sbp/poisson.hpp"
#include "sbp/sequences.hpp"
#include "sbp/simulator.hpp"

namespace {

using sbp::Execution;

sbp::SingleBirthModel catastrophe() { return sbp::model_uniform_catastrophe(1.0, 1.0, 1.0); }

void triangle(benchmark::State& state, Execution ex) {
  const auto N = static_cast<std::size_t>(state.range(0));
  const auto model = catastrophe();
  for (auto _ : state) {
    sbp::SequenceTable table(model, sbp::Coefficients::constant(-0.5), N,
                             {.full_triangle = true, .execution = ex});
    benchmark::DoNotOptimize(table);
  }
}

void poisson(benchmark::State& state, Execution ex) {
  const auto N = static_cast<std::size_t>(state.range(0));
  sbp::PoissonProblem problem{catastrophe(), sbp::Coefficients::constant(-0.5), std::vector<double>(N, 1.0), 1.0, N};
  for (auto _ : state) {
    auto solution = sbp::solve_poisson(problem, sbp::PoissonMethod::Triangle, ex);
    benchmark::DoNotOptimize(solution);
  }
}

void batch(benchmark::State& state, Execution ex) {
  const auto samples = static_cast<std::size_t>(state.range(0));
  const auto model = sbp::model_birth_death([](std::size_t) { return 1.0; }, [](std::size_t) { return 2.0; });
  for (auto _ : state) {
    auto paths = sbp::simulate_batch(model, 0, sbp::FirstReturnTo{0}, samples, 7, {}, ex);
    benchmark::DoNotOptimize(paths);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(triangle, serial, Execution::Serial)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(triangle, omp, Execution::Parallel)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(poisson, serial, Execution::Serial)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(poisson, omp, Execution::Parallel)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(batch, serial, Execution::Serial)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(batch, omp, Execution::Parallel)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
