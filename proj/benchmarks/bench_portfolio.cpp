#include <benchmark/benchmark.h>

#include "econoscale/portfolio.hpp"

using namespace econoscale::portfolio;

static void BM_GeneratePair(benchmark::State& state) {
  JumpPairSpec spec;
  spec.length = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_common_jump_pair(spec, ++seed));
}
BENCHMARK(BM_GeneratePair)->Arg(2500)->Arg(250000);

static void BM_Optimize(benchmark::State& state) {
  JumpPairSpec spec;
  spec.length = static_cast<std::size_t>(state.range(0));
  const auto p = generate_common_jump_pair(spec, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimize_two_asset(p, Mode::variance));
    benchmark::DoNotOptimize(optimize_two_asset(p, Mode::tail, 1.5));
  }
}
BENCHMARK(BM_Optimize)->Arg(2500)->Arg(250000);

BENCHMARK_MAIN();
