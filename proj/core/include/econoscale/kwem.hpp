#pragma once

// Kinetic wealth-exchange models: a closed economy of N agents in which a
// randomly chosen pair (j, k) trades an amount dx per time step,
//
//   x_j' = x_j - dx,   x_k' = x_k + dx,
//
// so the total wealth is conserved. One trade is one time step.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "econoscale/rng.hpp"

namespace econoscale::kwem {

struct AgentPopulation {
  std::vector<double> wealths;  // x_i >= 0
  std::vector<double> savings;  // lambda_i in [0, 1)
  double total_wealth = 0.0;    // conserved; fixed at construction

  std::size_t size() const noexcept { return wealths.size(); }
  double mean_wealth() const noexcept {
    return total_wealth / static_cast<double>(wealths.size());
  }
  /// Freshly summed wealth, for checking conservation against total_wealth.
  double current_sum() const noexcept;
};

/// How saving parameters are assigned at initialisation.
struct SavingsSpec {
  enum class Kind { uniform_value, sampled_uniform };

  Kind kind = Kind::uniform_value;
  double lambda = 0.0;     // the common value, or the upper bound lambda_max
  std::uint64_t seed = 0;  // sampled_uniform only

  static SavingsSpec uniform(double lambda) { return {Kind::uniform_value, lambda, 0}; }
  /// lambda_i drawn independently and uniformly on [0, lambda_max).
  static SavingsSpec sampled(double lambda_max, std::uint64_t seed) {
    return {Kind::sampled_uniform, lambda_max, seed};
  }
};

/// Throws invalid_argument for n < 2, non-positive wealth, or lambda outside
/// [0, 1) (lambda_max may equal 1, since samples stay strictly below it).
AgentPopulation init_population(std::size_t n, double initial_wealth,
                                const SavingsSpec& savings);

enum class RuleKind { constant_amount, homogeneous_omega, heterogeneous_lambda };

struct ExchangeRule {
  RuleKind kind = RuleKind::homogeneous_omega;
  double kappa = 0.0;  // constant_amount
  double omega = 1.0;  // homogeneous_omega, in (0, 1]

  static ExchangeRule constant_amount(double kappa) {
    return {RuleKind::constant_amount, kappa, 0.0};
  }
  static ExchangeRule homogeneous(double omega) {
    return {RuleKind::homogeneous_omega, 0.0, omega};
  }
  static ExchangeRule homogeneous_saving(double lambda) { return homogeneous(1.0 - lambda); }
  static ExchangeRule heterogeneous() { return {RuleKind::heterogeneous_lambda, 0.0, 0.0}; }

  void validate() const;
};

/// dx = omega * ((1 - eps) x_j - eps x_k). Never drives either wealth negative.
double delta_x_homogeneous(double xj, double xk, double omega, double eps) noexcept;

/// dx = kappa when the payer can afford it, otherwise nullopt (trade skipped).
std::optional<double> delta_x_constant(double xj, double xk, double kappa) noexcept;

/// dx such that x_j' = lambda_j x_j + eps [(1 - lambda_j) x_j + (1 - lambda_k) x_k].
/// Equal savings reduce it to delta_x_homogeneous with omega = 1 - lambda.
double delta_x_heterogeneous(double xj, double xk, double lambda_j, double lambda_k,
                             double eps) noexcept;

/// Wealths in agent order at a given trade count.
struct PopulationSnapshot {
  std::uint64_t trade_count = 0;
  std::vector<double> wealths;
  std::vector<double> savings;
};

struct SimConfig {
  std::size_t n_agents = 2;
  std::uint64_t n_trades = 0;
  std::uint64_t seed = 0;
  ExchangeRule rule;
  double initial_wealth = 1.0;
  /// Defaults: 1 - omega for homogeneous runs, 0 for constant_amount.
  /// Required for heterogeneous_lambda.
  std::optional<SavingsSpec> savings;
  std::vector<std::uint64_t> snapshot_times;  // ascending, each <= n_trades

  void validate() const;
  SavingsSpec resolved_savings() const;
};

struct SimulationResult {
  AgentPopulation final_population;
  std::vector<PopulationSnapshot> snapshots;
  std::uint64_t executed_trades = 0;
  std::uint64_t rejected_trades = 0;  // constant_amount trades the payer could not afford
};

/// Sequential trade loop over one population. Pairs are drawn uniformly over
/// ordered pairs j != k (uniform over unordered pairs, random direction);
/// the omega rules then draw eps uniformly on (0, 1).
class Simulator {
 public:
  Simulator(AgentPopulation population, ExchangeRule rule, std::uint64_t seed);

  void advance(std::uint64_t trades);

  const AgentPopulation& population() const noexcept { return population_; }
  std::uint64_t trade_count() const noexcept { return trades_; }
  std::uint64_t rejected_trades() const noexcept { return rejected_; }
  PopulationSnapshot snapshot() const;

 private:
  template <RuleKind Kind>
  void run(std::uint64_t trades);

  AgentPopulation population_;
  ExchangeRule rule_;
  SplitMix64 rng_;
  std::uint64_t trades_ = 0;
  std::uint64_t rejected_ = 0;
};

SimulationResult run_simulation(const SimConfig& config);

/// Per-agent wealth samples taken at a fixed trade spacing.
struct AgentHistories {
  std::uint64_t trades_between_samples = 0;
  std::vector<double> savings;
  std::vector<std::vector<double>> samples;  // samples[agent][k]

  std::size_t agents() const noexcept { return samples.size(); }
};

/// Runs `burn_in` trades, then records every agent's wealth `count` times,
/// `interval` trades apart.
AgentHistories sample_histories(Simulator& sim, std::uint64_t burn_in,
                                std::uint64_t interval, std::size_t count);

}  // namespace econoscale::kwem
