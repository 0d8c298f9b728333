#include <cmath>

#include <benchmark/benchmark.h>

#include "econoscale/mlvp.hpp"
#include "econoscale/series.hpp"

using namespace econoscale;

static void BM_ExtractPeriods(benchmark::State& state) {
  const auto s = series::generate_binomial_cascade({0.7, static_cast<int>(state.range(0)), 1});
  const mlvp::MlvpConfig c{std::ldexp(1.0, -14), 16};
  for (auto _ : state) benchmark::DoNotOptimize(mlvp::extract_periods(s, c));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * s.size()));
}
BENCHMARK(BM_ExtractPeriods)->Arg(16)->Arg(20);

static void BM_CollapseGrid(benchmark::State& state) {
  const auto s = series::generate_binomial_cascade({0.7, 18, 1});
  const std::vector<std::size_t> windows{4, 8, 16, 32};
  std::vector<double> deltas;
  for (int k = 9; k <= 15; ++k) deltas.push_back(std::ldexp(1.0, -k));
  mlvp::CollapseOptions o;
  o.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mlvp::collapse_test(s, deltas, windows, o));
}
BENCHMARK(BM_CollapseGrid)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_Hazard(benchmark::State& state) {
  const auto s = series::generate_binomial_cascade({0.7, 18, 1});
  const mlvp::MlvpConfig c{std::ldexp(1.0, -13), 8};
  for (auto _ : state) benchmark::DoNotOptimize(mlvp::silence_breaking_hazard(s, c));
}
BENCHMARK(BM_Hazard)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
