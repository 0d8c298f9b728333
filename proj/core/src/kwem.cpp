#include "econoscale/kwem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "econoscale/error.hpp"

namespace econoscale::kwem {

double AgentPopulation::current_sum() const noexcept {
  return std::accumulate(wealths.begin(), wealths.end(), 0.0);
}

AgentPopulation init_population(std::size_t n, double initial_wealth,
                                const SavingsSpec& savings) {
  require(n >= 2, "population needs at least 2 agents, got " + std::to_string(n));
  require(std::isfinite(initial_wealth) && initial_wealth > 0.0,
          "initial wealth must be positive");

  AgentPopulation pop;
  pop.wealths.assign(n, initial_wealth);
  pop.total_wealth = static_cast<double>(n) * initial_wealth;

  switch (savings.kind) {
    case SavingsSpec::Kind::uniform_value:
      require(savings.lambda >= 0.0 && savings.lambda < 1.0,
              "saving parameter lambda must lie in [0,1)");
      pop.savings.assign(n, savings.lambda);
      break;
    case SavingsSpec::Kind::sampled_uniform: {
      require(savings.lambda > 0.0 && savings.lambda <= 1.0,
              "lambda_max must lie in (0,1]");
      SplitMix64 rng(savings.seed);
      pop.savings.resize(n);
      for (auto& l : pop.savings) l = savings.lambda * rng.uniform01();
      break;
    }
  }
  return pop;
}

void ExchangeRule::validate() const {
  switch (kind) {
    case RuleKind::constant_amount:
      require(std::isfinite(kappa) && kappa > 0.0, "rule.kappa must be positive");
      break;
    case RuleKind::homogeneous_omega:
      require(omega > 0.0 && omega <= 1.0,
              "rule.omega must lie in (0,1] (lambda = 1 - omega in [0,1))");
      break;
    case RuleKind::heterogeneous_lambda:
      break;
  }
}

double delta_x_homogeneous(double xj, double xk, double omega, double eps) noexcept {
  return omega * ((1.0 - eps) * xj - eps * xk);
}

std::optional<double> delta_x_constant(double xj, double /*xk*/, double kappa) noexcept {
  if (xj - kappa < 0.0) return std::nullopt;
  return kappa;
}

double delta_x_heterogeneous(double xj, double xk, double lambda_j, double lambda_k,
                             double eps) noexcept {
  const double xj_new = lambda_j * xj + eps * ((1.0 - lambda_j) * xj + (1.0 - lambda_k) * xk);
  return xj - xj_new;
}

void SimConfig::validate() const {
  require(n_agents >= 2, "n_agents must be >= 2");
  require(std::isfinite(initial_wealth) && initial_wealth > 0.0,
          "initial_wealth must be positive");
  rule.validate();
  if (rule.kind == RuleKind::heterogeneous_lambda) {
    require(savings.has_value(), "heterogeneous_lambda rule needs a savings specification");
  }
  require(std::is_sorted(snapshot_times.begin(), snapshot_times.end()),
          "snapshot_times must be ascending");
  require(snapshot_times.empty() || snapshot_times.back() <= n_trades,
          "snapshot_times must not exceed n_trades");
}

SavingsSpec SimConfig::resolved_savings() const {
  if (savings) return *savings;
  if (rule.kind == RuleKind::homogeneous_omega) return SavingsSpec::uniform(1.0 - rule.omega);
  return SavingsSpec::uniform(0.0);
}

Simulator::Simulator(AgentPopulation population, ExchangeRule rule, std::uint64_t seed)
    : population_(std::move(population)), rule_(rule), rng_(seed) {
  rule_.validate();
  require(population_.size() >= 2, "population needs at least 2 agents");
  require(population_.savings.size() == population_.size(),
          "savings and wealths differ in length");
}

template <RuleKind Kind>
void Simulator::run(std::uint64_t trades) {
  auto& x = population_.wealths;
  const auto& lambda = population_.savings;
  const std::uint64_t n = x.size();
  const double omega = rule_.omega;
  const double kappa = rule_.kappa;

  for (std::uint64_t t = 0; t < trades; ++t) {
    const std::uint64_t j = rng_.below(n);
    std::uint64_t k = rng_.below(n - 1);
    if (k >= j) ++k;

    double dx = 0.0;
    if constexpr (Kind == RuleKind::constant_amount) {
      const auto amount = delta_x_constant(x[j], x[k], kappa);
      if (!amount) {
        ++rejected_;
        continue;
      }
      dx = *amount;
    } else {
      const double eps = rng_.uniform_open();
      if constexpr (Kind == RuleKind::homogeneous_omega) {
        dx = delta_x_homogeneous(x[j], x[k], omega, eps);
      } else {
        dx = delta_x_heterogeneous(x[j], x[k], lambda[j], lambda[k], eps);
      }
      // Rounding can leave a one-ulp overdraft; clamp to the payer's stake.
      dx = std::clamp(dx, -x[k], x[j]);
    }
    x[j] -= dx;
    x[k] += dx;
  }
  trades_ += trades;
}

void Simulator::advance(std::uint64_t trades) {
  switch (rule_.kind) {
    case RuleKind::constant_amount: run<RuleKind::constant_amount>(trades); break;
    case RuleKind::homogeneous_omega: run<RuleKind::homogeneous_omega>(trades); break;
    case RuleKind::heterogeneous_lambda: run<RuleKind::heterogeneous_lambda>(trades); break;
  }
}

PopulationSnapshot Simulator::snapshot() const {
  return {trades_, population_.wealths, population_.savings};
}

SimulationResult run_simulation(const SimConfig& config) {
  config.validate();
  Simulator sim(init_population(config.n_agents, config.initial_wealth, config.resolved_savings()),
                config.rule, config.seed);

  SimulationResult result;
  for (std::uint64_t at : config.snapshot_times) {
    sim.advance(at - sim.trade_count());
    result.snapshots.push_back(sim.snapshot());
  }
  sim.advance(config.n_trades - sim.trade_count());
  result.final_population = sim.population();
  result.executed_trades = sim.trade_count() - sim.rejected_trades();
  result.rejected_trades = sim.rejected_trades();
  return result;
}

AgentHistories sample_histories(Simulator& sim, std::uint64_t burn_in,
                                std::uint64_t interval, std::size_t count) {
  require(interval > 0, "sampling interval must be positive");
  sim.advance(burn_in);
  const auto& pop = sim.population();
  AgentHistories h;
  h.trades_between_samples = interval;
  h.savings = pop.savings;
  h.samples.assign(pop.size(), {});
  for (auto& s : h.samples) s.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    if (c > 0) sim.advance(interval);
    for (std::size_t i = 0; i < pop.size(); ++i) h.samples[i].push_back(pop.wealths[i]);
  }
  return h;
}

}  // namespace econoscale::kwem
