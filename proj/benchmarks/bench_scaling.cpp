#include <benchmark/benchmark.h>

#include "econoscale/scaling.hpp"
#include "econoscale/series.hpp"

using namespace econoscale;

static void BM_FgnSynthesis(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(series::generate_fgn(0.7, n, 1));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_FgnSynthesis)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);

static void BM_HurstDfa(benchmark::State& state) {
  const auto s = series::generate_fgn_path(0.7, static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(scaling::hurst_dfa(s));
}
BENCHMARK(BM_HurstDfa)->Arg(1 << 14)->Arg(1 << 16)->Unit(benchmark::kMillisecond);

static void BM_CascadeSpectrum(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(scaling::cascade_spectrum(0.7));
}
BENCHMARK(BM_CascadeSpectrum);

BENCHMARK_MAIN();
