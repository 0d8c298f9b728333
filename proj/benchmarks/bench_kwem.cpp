#include <benchmark/benchmark.h>

#include "econoscale/kwem.hpp"

using namespace econoscale::kwem;

static void BM_Homogeneous(benchmark::State& state) {
  Simulator sim(init_population(static_cast<std::size_t>(state.range(0)), 1.0, SavingsSpec::uniform(0.5)),
                ExchangeRule::homogeneous_saving(0.5), 1);
  const std::uint64_t batch = 1 << 20;
  for (auto _ : state) sim.advance(batch);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}
BENCHMARK(BM_Homogeneous)->Arg(1000)->Arg(100000);

static void BM_Heterogeneous(benchmark::State& state) {
  Simulator sim(init_population(1000, 1.0, SavingsSpec::sampled(1.0, 2)), ExchangeRule::heterogeneous(), 1);
  const std::uint64_t batch = 1 << 20;
  for (auto _ : state) sim.advance(batch);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}
BENCHMARK(BM_Heterogeneous);

static void BM_ConstantAmount(benchmark::State& state) {
  Simulator sim(init_population(1000, 1.0, SavingsSpec::uniform(0.0)), ExchangeRule::constant_amount(0.5), 1);
  const std::uint64_t batch = 1 << 20;
  for (auto _ : state) sim.advance(batch);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}
BENCHMARK(BM_ConstantAmount);

BENCHMARK_MAIN();
