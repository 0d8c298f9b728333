// Randomised invariants. Every suite draws its cases from a fixed seed, so a
// failure message names a case that can be replayed exactly.

#include <cmath>
#include <tuple>

#include <gtest/gtest.h>

#include "econoscale/error.hpp"
#include "econoscale/kwem.hpp"
#include "econoscale/mlvp.hpp"
#include "econoscale/series.hpp"
#include "oracles.hpp"
#include "property.hpp"

using namespace econoscale;
using namespace econoscale::testing;
using ::testing::AssertionFailure;
using ::testing::AssertionResult;
using ::testing::AssertionSuccess;
using mlvp::Mode;
using mlvp::Period;
using series::TimeSeries;

namespace {

struct MlvpCase {
  std::vector<double> values;
  std::size_t window = 1;
  double delta = 0.0;
};

std::ostream& operator<<(std::ostream& os, const MlvpCase& c) {
  return os << "window " << c.window << " delta " << c.delta << " values " << show(c.values);
}

MlvpCase random_case(Rng& rng) {
  MlvpCase c;
  const auto n = uniform_size(rng, 8, 600);
  c.values = bursty_walk(rng, n);
  c.window = uniform_size(rng, 1, std::min<std::size_t>(40, n - 2));
  c.delta = std::exp(uniform_real(rng, std::log(0.01), std::log(5.0)));
  return c;
}

// integer-valued series and power-of-two windows: every trailing mean is exact
MlvpCase exact_case(Rng& rng) {
  MlvpCase c;
  const auto n = uniform_size(rng, 40, 400);
  c.values = integer_series(rng, n, -20, 20);
  for (std::size_t i = 1; i < n; ++i) c.values[i] = c.values[i - 1] + c.values[i] / 4.0;
  c.window = std::size_t{1} << uniform_size(rng, 1, 4);
  c.delta = static_cast<double>(uniform_size(rng, 1, 40)) / 8.0;
  return c;
}

std::vector<char> quiet_mask(const MlvpCase& c, double delta) {
  std::vector<char> q(c.values.size(), 0);
  for (std::size_t i = c.window - 1; i < c.values.size(); ++i) {
    q[i] = std::abs(c.values[i] - oracle::trailing_mean(c.values, i, c.window)) <= delta;
  }
  return q;
}

}  // namespace

TEST(MlvpProperty, PeriodsAreMaximalDisjointAndComplete) {
  EXPECT_TRUE(for_all(1000, 1, random_case, [](const MlvpCase& c) -> AssertionResult {
    const auto got = mlvp::extract_periods(TimeSeries::from_values(c.values), {c.delta, c.window});
    const auto q = quiet_mask(c, c.delta);
    std::vector<int> cover(c.values.size(), 0);
    std::size_t prev_end = 0;
    for (std::size_t k = 0; k < got.periods.size(); ++k) {
      const auto& p = got.periods[k];
      if (p.length == 0) return AssertionFailure() << c << ": empty period";
      if (k > 0 && p.start <= prev_end) return AssertionFailure() << c << ": periods overlap or touch at " << p.start;
      prev_end = p.end();
      if (p.start > got.usable_start && q[p.start - 1]) {
        return AssertionFailure() << c << ": period at " << p.start << " extends to the left";
      }
      if (p.end() < c.values.size() && q[p.end()]) {
        return AssertionFailure() << c << ": period at " << p.start << " extends to the right";
      }
      if (p.censored != (p.end() == c.values.size())) {
        return AssertionFailure() << c << ": wrong censoring flag at " << p.start;
      }
      for (std::size_t i = p.start; i < p.end(); ++i) ++cover[i];
    }
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      const int want = i >= got.usable_start && q[i] ? 1 : 0;
      if (cover[i] != want) {
        return AssertionFailure() << c << ": sample " << i << " covered " << cover[i] << " times, expected " << want;
      }
    }
    return AssertionSuccess();
  }));
}

TEST(MlvpProperty, PeriodsGrowWithTheThreshold) {
  EXPECT_TRUE(for_all(1000, 2, random_case, [](const MlvpCase& c) -> AssertionResult {
    const auto s = TimeSeries::from_values(c.values);
    const auto narrow = mlvp::extract_periods(s, {c.delta, c.window});
    const auto wide = mlvp::extract_periods(s, {c.delta * 1.7, c.window});
    std::size_t j = 0;
    for (const auto& p : narrow.periods) {
      while (j < wide.periods.size() && wide.periods[j].end() <= p.start) ++j;
      if (j == wide.periods.size() || wide.periods[j].start > p.start || wide.periods[j].end() < p.end()) {
        return AssertionFailure() << c << ": period [" << p.start << ", " << p.end()
                                  << ") not inside any period at the larger threshold";
      }
    }
    return AssertionSuccess();
  }));
}

TEST(MlvpProperty, ShiftAndScaleLeavePeriodsUnchanged) {
  EXPECT_TRUE(for_all(1000, 3, exact_case, [](const MlvpCase& c) -> AssertionResult {
    const auto base = mlvp::extract_periods(TimeSeries::from_values(c.values), {c.delta, c.window});
    auto shifted = c.values;
    for (auto& x : shifted) x += 64.0;
    if (mlvp::extract_periods(TimeSeries::from_values(shifted), {c.delta, c.window}).periods != base.periods) {
      return AssertionFailure() << c << ": shift by 64 changed the periods";
    }
    for (double k : {0.25, 4.0}) {
      auto scaled = c.values;
      for (auto& x : scaled) x *= k;
      if (mlvp::extract_periods(TimeSeries::from_values(scaled), {c.delta * k, c.window}).periods != base.periods) {
        return AssertionFailure() << c << ": scaling by " << k << " changed the periods";
      }
    }
    return AssertionSuccess();
  }));
}

TEST(MlvpProperty, HazardIsTheSurvivalRatio) {
  EXPECT_TRUE(for_all(
      300, 4,
      [](Rng& rng) {
        std::vector<Period> periods;
        std::size_t start = 0;
        const auto n = uniform_size(rng, 60, 400);
        for (std::size_t i = 0; i < n; ++i) {
          const auto l = static_cast<std::size_t>(std::ceil(std::pow(uniform_real(rng, 0.0, 1.0), -1.2)));
          periods.push_back({start, std::min<std::size_t>(l, 5000), false});
          start += l + 1;
        }
        return periods;
      },
      [](const std::vector<Period>& periods) -> AssertionResult {
        std::vector<std::size_t> lengths;
        for (const auto& p : periods) lengths.push_back(p.length);
        const auto r = mlvp::survival_curve(lengths);
        mlvp::HazardOptions o;
        o.ell_min = 1;
        o.min_at_risk = 1;
        mlvp::HazardCurve h;
        try {
          h = mlvp::hazard_from_periods(periods, o);
        } catch (const Error&) {
          return AssertionSuccess();  // too few populated bins for a slope; the raw curve is not returned
        }
        for (std::size_t l = 1; l < r.size(); ++l) {
          const double ratio = r.counts[l] / r.counts[l - 1];
          if (ratio != 1.0 - h.raw_hazard[l - 1] &&
              std::abs(ratio - (1.0 - h.raw_hazard[l - 1])) > 1e-15) {
            return AssertionFailure() << "ell " << l << ": R ratio " << ratio << " vs 1 - hazard "
                                      << 1.0 - h.raw_hazard[l - 1];
          }
        }
        return AssertionSuccess();
      }));
}

TEST(MlvpProperty, MultivariateMasksCombine) {
  EXPECT_TRUE(for_all(300, 5, random_case, [](const MlvpCase& c) -> AssertionResult {
    auto s = TimeSeries::from_values(c.values);
    std::vector<double> vol(c.values.rbegin(), c.values.rend());
    s.volume = vol;
    const mlvp::MlvpConfig cfg{c.delta, c.window};
    const auto both = mlvp::multivariate_periods(s, cfg, cfg, mlvp::Combine::both_quiet);
    const auto any = mlvp::multivariate_periods(s, cfg, cfg, mlvp::Combine::either_quiet);
    const auto qp = quiet_mask(c, c.delta);
    const auto qv = quiet_mask({vol, c.window, c.delta}, c.delta);
    std::vector<char> and_mask(qp.size()), or_mask(qp.size());
    for (std::size_t i = 0; i < qp.size(); ++i) {
      and_mask[i] = qp[i] && qv[i];
      or_mask[i] = qp[i] || qv[i];
    }
    if (both.periods != mlvp::runs(and_mask, c.window - 1)) return AssertionFailure() << c << ": both_quiet";
    if (any.periods != mlvp::runs(or_mask, c.window - 1)) return AssertionFailure() << c << ": either_quiet";
    return AssertionSuccess();
  }));
}

namespace {

struct SimCase {
  std::size_t agents;
  std::uint64_t trades;
  std::uint64_t seed;
  kwem::ExchangeRule rule;
  kwem::SavingsSpec savings;
};

std::ostream& operator<<(std::ostream& os, const SimCase& c) {
  return os << c.agents << " agents, " << c.trades << " trades, seed " << c.seed << ", rule "
            << static_cast<int>(c.rule.kind);
}

SimCase random_sim(Rng& rng) {
  SimCase c;
  c.agents = uniform_size(rng, 2, 200);
  c.trades = uniform_size(rng, 0, 20000);
  c.seed = rng();
  switch (uniform_size(rng, 0, 2)) {
    case 0:
      c.rule = kwem::ExchangeRule::constant_amount(uniform_real(rng, 0.01, 2.0));
      c.savings = kwem::SavingsSpec::uniform(0.0);
      break;
    case 1: {
      const double lambda = uniform_real(rng, 0.0, 0.99);
      c.rule = kwem::ExchangeRule::homogeneous_saving(lambda);
      c.savings = kwem::SavingsSpec::uniform(lambda);
      break;
    }
    default:
      c.rule = kwem::ExchangeRule::heterogeneous();
      c.savings = kwem::SavingsSpec::sampled(uniform_real(rng, 0.0, 1.0), rng());
  }
  return c;
}

kwem::Simulator make(const SimCase& c) {
  return kwem::Simulator(kwem::init_population(c.agents, 1.0, c.savings), c.rule, c.seed);
}

}  // namespace

TEST(KwemProperty, ConservesWealthAndStaysNonNegative) {
  EXPECT_TRUE(for_all(300, 11, random_sim, [](const SimCase& c) -> AssertionResult {
    auto sim = make(c);
    const double total = sim.population().total_wealth;
    for (int step = 0; step < 4; ++step) {
      sim.advance(c.trades / 4);
      const double drift = std::abs(sim.population().current_sum() - total) / total;
      if (drift > 1e-9) return AssertionFailure() << c << ": relative drift " << drift;
      for (double w : sim.population().wealths) {
        if (w < 0.0) return AssertionFailure() << c << ": negative wealth " << w;
      }
    }
    return AssertionSuccess();
  }));
}

TEST(KwemProperty, SameSeedSameRun) {
  EXPECT_TRUE(for_all(100, 12, random_sim, [](const SimCase& c) -> AssertionResult {
    auto a = make(c), b = make(c);
    a.advance(c.trades);
    b.advance(c.trades / 3);
    b.advance(c.trades - c.trades / 3);
    if (a.population().wealths != b.population().wealths) return AssertionFailure() << c << ": runs differ";
    if (a.rejected_trades() != b.rejected_trades()) return AssertionFailure() << c << ": rejections differ";
    return AssertionSuccess();
  }));
}

TEST(KwemProperty, EqualSavingsReduceToTheHomogeneousRule) {
  EXPECT_TRUE(for_all(
      100, 13,
      [](Rng& rng) {
        return std::make_tuple(uniform_size(rng, 2, 100), uniform_real(rng, 0.0, 0.95), rng());
      },
      [](const auto& c) -> AssertionResult {
        const auto& [n, lambda, seed] = c;
        const auto pop = kwem::init_population(n, 1.0, kwem::SavingsSpec::uniform(lambda));
        kwem::Simulator het(pop, kwem::ExchangeRule::heterogeneous(), seed);
        kwem::Simulator hom(pop, kwem::ExchangeRule::homogeneous_saving(lambda), seed);
        for (int t = 0; t < 500; ++t) {
          het.advance(1);
          hom.advance(1);
          for (std::size_t i = 0; i < n; ++i) {
            const double d = std::abs(het.population().wealths[i] - hom.population().wealths[i]);
            if (d > 1e-12 * pop.total_wealth) {
              return AssertionFailure() << "N=" << n << " lambda=" << lambda << " seed=" << seed << ": trade " << t
                                        << " agent " << i << " differs by " << d;
            }
          }
        }
        return AssertionSuccess();
      }));
}

TEST(SeriesProperty, GeneratorsAreLengthExact) {
  EXPECT_TRUE(for_all(
      60, 14,
      [](Rng& rng) { return std::make_tuple(static_cast<int>(uniform_size(rng, 1, 14)), uniform_real(rng, 0.05, 0.95), rng()); },
      [](const auto& c) -> AssertionResult {
        const auto& [depth, p, seed] = c;
        const auto m = series::binomial_cascade_masses({p, depth, seed});
        const auto s = series::generate_binomial_cascade({p, depth, seed});
        if (m.size() != (std::size_t{1} << depth)) return AssertionFailure() << "mass count " << m.size();
        if (s.size() != m.size() + 1) return AssertionFailure() << "path length " << s.size();
        long double total = 0.0L;
        for (double x : m) total += x;
        if (std::abs(static_cast<double>(total) - 1.0) > 1e-12) return AssertionFailure() << "mass " << static_cast<double>(total);
        return AssertionSuccess();
      }));
}
