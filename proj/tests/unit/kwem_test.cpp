#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "econoscale/error.hpp"
#include "econoscale/kwem.hpp"
#include "econoscale/rng.hpp"
#include "econoscale/snapshot_io.hpp"
#include "oracles.hpp"

using namespace econoscale;
using namespace econoscale::kwem;

TEST(InitPopulation, TwoAgentsEqualWealth) {
  const auto p = init_population(2, 1.0, SavingsSpec::uniform(0.0));
  EXPECT_EQ(p.wealths, (std::vector<double>{1.0, 1.0}));
  EXPECT_DOUBLE_EQ(p.total_wealth, 2.0);
}

TEST(InitPopulation, UniformSavings) {
  const auto p = init_population(4, 2.5, SavingsSpec::uniform(0.5));
  EXPECT_EQ(p.savings, (std::vector<double>{0.5, 0.5, 0.5, 0.5}));
  EXPECT_DOUBLE_EQ(p.total_wealth, 10.0);
}

TEST(InitPopulation, SampledSavingsReplayTheGenerator) {
  const std::uint64_t seed = 42;
  const auto p = init_population(3, 1.0, SavingsSpec::sampled(1.0, seed));
  SplitMix64 replay(seed);
  std::set<double> distinct;
  for (double l : p.savings) {
    EXPECT_DOUBLE_EQ(l, replay.uniform01());
    EXPECT_GE(l, 0.0);
    EXPECT_LT(l, 1.0);
    distinct.insert(l);
  }
  EXPECT_EQ(distinct.size(), 3u);
}

TEST(InitPopulation, RejectsBadArguments) {
  EXPECT_THROW(init_population(1, 1.0, SavingsSpec::uniform(0.0)), Error);
  EXPECT_THROW(init_population(5, 0.0, SavingsSpec::uniform(0.0)), Error);
  EXPECT_THROW(init_population(5, 1.0, SavingsSpec::uniform(1.0)), Error);
  EXPECT_THROW(init_population(5, 1.0, SavingsSpec::uniform(-0.1)), Error);
}

TEST(DeltaX, HomogeneousHandValue) {
  EXPECT_DOUBLE_EQ(delta_x_homogeneous(1.0, 1.0, 1.0, 0.25), 0.5);
}

TEST(DeltaX, HomogeneousSymmetricPairAtHalf) {
  for (double omega : {0.1, 0.5, 1.0}) EXPECT_DOUBLE_EQ(delta_x_homogeneous(3.0, 3.0, omega, 0.5), 0.0);
}

TEST(DeltaX, HomogeneousVanishesWithOmega) {
  EXPECT_NEAR(delta_x_homogeneous(7.0, 2.0, 1e-12, 0.3), 0.0, 1e-10);
}

TEST(DeltaX, HomogeneousKeepsBothWealthsNonNegative) {
  for (double eps : {1e-9, 0.3, 0.999999}) {
    const double dx = delta_x_homogeneous(2.0, 5.0, 0.8, eps);
    EXPECT_GE(2.0 - dx, 0.0);
    EXPECT_GE(5.0 + dx, 0.0);
  }
}

TEST(DeltaX, ConstantAmount) {
  EXPECT_EQ(delta_x_constant(5.0, 0.0, 1.0), 1.0);
  EXPECT_FALSE(delta_x_constant(0.5, 3.0, 1.0).has_value());
  const auto dx = delta_x_constant(1.0, 1.0, 1.0);
  ASSERT_TRUE(dx.has_value());
  EXPECT_EQ(1.0 - *dx, 0.0);
}

TEST(DeltaX, HeterogeneousReducesToHomogeneous) {
  for (double lambda : {0.0, 0.3, 0.9}) {
    for (double eps : {0.1, 0.5, 0.77}) {
      EXPECT_NEAR(delta_x_heterogeneous(1.3, 0.4, lambda, lambda, eps),
                  delta_x_homogeneous(1.3, 0.4, 1.0 - lambda, eps), 1e-15);
    }
  }
}

TEST(DeltaX, HeterogeneousHandValue) {
  const double dx = delta_x_heterogeneous(1.0, 1.0, 0.0, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(1.0 - dx, 0.75);
  EXPECT_DOUBLE_EQ(dx, 0.25);
}

TEST(DeltaX, HeterogeneousPayerLimit) {
  const double xj = 1.0, xk = 2.0, lk = 0.4;
  const double dx = delta_x_heterogeneous(xj, xk, 0.0, lk, 1.0 - 1e-12);
  EXPECT_NEAR(xj - dx, xj + (1.0 - lk) * xk, 1e-9);
}

TEST(RunSimulation, NoExchangeLimitKeepsWealths) {
  SimConfig c;
  c.n_agents = 2;
  c.n_trades = 1000;
  c.rule = ExchangeRule::homogeneous(1e-300);
  c.savings = SavingsSpec::uniform(0.0);
  const auto r = run_simulation(c);
  for (double w : r.final_population.wealths) EXPECT_NEAR(w, 1.0, 1e-12);
}

TEST(RunSimulation, ZeroTradesSnapshotIsInitialPopulation) {
  SimConfig c;
  c.n_agents = 100;
  c.n_trades = 0;
  c.snapshot_times = {0};
  const auto r = run_simulation(c);
  ASSERT_EQ(r.snapshots.size(), 1u);
  EXPECT_EQ(r.snapshots[0].trade_count, 0u);
  EXPECT_EQ(r.snapshots[0].wealths, std::vector<double>(100, 1.0));
}

TEST(RunSimulation, SnapshotsAtRequestedCounts) {
  SimConfig c;
  c.n_agents = 10;
  c.n_trades = 500;
  c.snapshot_times = {0, 100, 250, 500};
  const auto r = run_simulation(c);
  ASSERT_EQ(r.snapshots.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(r.snapshots[i].trade_count, c.snapshot_times[i]);
  EXPECT_EQ(r.snapshots.back().wealths, r.final_population.wealths);
}

TEST(RunSimulation, RejectsSnapshotBeyondRun) {
  SimConfig c;
  c.n_agents = 10;
  c.n_trades = 5;
  c.snapshot_times = {6};
  EXPECT_THROW(run_simulation(c), Error);
}

TEST(RunSimulation, ConstantRuleCountsRejections) {
  SimConfig c;
  c.n_agents = 50;
  c.n_trades = 20000;
  c.rule = ExchangeRule::constant_amount(0.6);
  const auto r = run_simulation(c);
  EXPECT_GT(r.rejected_trades, 0u);
  EXPECT_EQ(r.executed_trades + r.rejected_trades, c.n_trades);
  for (double w : r.final_population.wealths) EXPECT_GE(w, 0.0);
}

TEST(RunSimulation, ExponentialEquilibrium) {
  // the histogram is accumulated over the stationary part of the run; a
  // single 1000-agent snapshot alone has KS noise near 0.03
  SimConfig c;
  c.n_agents = 1000;
  c.n_trades = 1000000;
  c.seed = 3;
  c.rule = ExchangeRule::homogeneous(1.0);
  for (std::uint64_t t = 200000; t <= c.n_trades; t += 10000) c.snapshot_times.push_back(t);
  const auto r = run_simulation(c);
  std::vector<double> pooled;
  for (const auto& s : r.snapshots) pooled.insert(pooled.end(), s.wealths.begin(), s.wealths.end());
  const double mean = r.final_population.mean_wealth();
  const double ks = oracle::ks_distance(pooled, [&](double x) { return 1.0 - std::exp(-x / mean); });
  EXPECT_LT(ks, 0.02);
}

TEST(Pairs, OrderedPairsAreUniform) {
  // each ordered pair (j, k), j != k, among 4 agents should be drawn equally often
  SplitMix64 rng(9);
  std::vector<int> counts(16, 0);
  const int draws = 120000;
  for (int t = 0; t < draws; ++t) {
    const auto j = rng.below(4);
    auto k = rng.below(3);
    if (k >= j) ++k;
    ++counts[j * 4 + k];
  }
  for (int j = 0; j < 4; ++j) {
    EXPECT_EQ(counts[j * 4 + j], 0);
    for (int k = 0; k < 4; ++k) {
      if (j != k) {
        EXPECT_NEAR(counts[j * 4 + k], draws / 12.0, 5 * std::sqrt(draws / 12.0));
      }
    }
  }
}

TEST(SnapshotCsv, RoundTripIsExact) {
  SimConfig c;
  c.n_agents = 20;
  c.n_trades = 1000;
  c.rule = ExchangeRule::heterogeneous();
  c.savings = SavingsSpec::sampled(0.9, 4);
  const auto r = run_simulation(c);
  const PopulationSnapshot snap{r.executed_trades, r.final_population.wealths, r.final_population.savings};
  std::stringstream ss;
  write_snapshot_csv(ss, snap);
  const auto back = read_snapshot_csv(ss, "memory");
  EXPECT_EQ(back.trade_count, snap.trade_count);
  EXPECT_EQ(back.wealths, snap.wealths);
  EXPECT_EQ(back.savings, snap.savings);
}

TEST(SnapshotCsv, HeaderAndRows) {
  const PopulationSnapshot snap{7, {1.5, 0.5}, {0.0, 0.25}};
  std::stringstream ss;
  write_snapshot_csv(ss, snap);
  EXPECT_EQ(ss.str(), "# trade_count: 7\nindex,wealth,lambda\n0,1.5,0\n1,0.5,0.25\n");
}

TEST(SnapshotCsv, MalformedRowNamesTheLine) {
  std::stringstream ss("index,wealth,lambda\n0,1,0\n1,abc,0\n");
  try {
    read_snapshot_csv(ss, "bad.csv");
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse_error);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}
