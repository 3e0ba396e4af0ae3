#include <benchmark/benchmark.h>

#include "ebayes/counts.hpp"
#include "ebayes/estimators.hpp"
#include "ebayes/mixtures.hpp"

using namespace ebayes;

namespace {

// End-to-end fit from raw observations under a Unif(4, 30) prior.
void BM_Fit(benchmark::State& state, Method method) {
  const auto draw = sample(Prior(UniformInterval{4.0, 30.0}), static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit(method, tabulate(draw.observations, 1)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_CAPTURE(BM_Fit, erm, Method::erm)->RangeMultiplier(10)->Range(1000, 1000000);
BENCHMARK_CAPTURE(BM_Fit, robbins, Method::robbins)->RangeMultiplier(10)->Range(1000, 1000000);
BENCHMARK_CAPTURE(BM_Fit, mono_robbins, Method::mono_robbins)->RangeMultiplier(10)->Range(1000, 1000000);

void BM_FitMulti(benchmark::State& state) {
  const Prior tri(TriangleUniform{{{{0.0, 0.0}, {5.0, 0.0}, {0.0, 5.0}}}});
  const auto draw = sample(tri, static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(fit(Method::erm_multi, tabulate(draw.observations, 2)));
}
BENCHMARK(BM_FitMulti)->RangeMultiplier(10)->Range(1000, 100000);

void BM_BayesTable(benchmark::State& state) {
  const auto d = discretize(Prior(ExponentialRate{2.0}));
  for (auto _ : state) benchmark::DoNotOptimize(bayes_estimator(d));
}
BENCHMARK(BM_BayesTable);

}  // namespace

BENCHMARK_MAIN();
