#include <benchmark/benchmark.h>

#include <random>

#include "reamot/assignment.hpp"

using namespace reamot::assignment;

static void BM_SolveSquare(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CostMatrix m(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) m(r, c) = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve(m));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveSquare)->RangeMultiplier(2)->Range(4, 128)->Complexity();
