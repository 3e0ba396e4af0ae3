#include <benchmark/benchmark.h>

#include <random>

#include "ebayes/isotonic.hpp"

using namespace ebayes;

namespace {

// Noisy increasing trend; blocks of widely varying length.
isotonic::IntegerProblem trend(std::size_t k) {
  std::mt19937_64 gen(k);
  std::uniform_int_distribution<std::int64_t> vd(1, 20), noise(0, 40);
  isotonic::IntegerProblem p;
  for (std::size_t i = 0; i < k; ++i) {
    p.positions.push_back(static_cast<std::int64_t>(i));
    p.quad_weights.push_back(vd(gen));
    p.lin_coeffs.push_back(p.quad_weights.back() * static_cast<std::int64_t>(i / 64) + noise(gen));
  }
  return p;
}

void BM_Stack(benchmark::State& state) {
  const auto p = trend(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(isotonic::solve_stack(p));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Stack)->RangeMultiplier(4)->Range(1 << 10, 1 << 20)->Complexity(benchmark::oN);

void BM_Blockwise(benchmark::State& state) {
  const auto p = trend(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(isotonic::solve_blockwise(p));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Blockwise)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Complexity();

}  // namespace

BENCHMARK_MAIN();
