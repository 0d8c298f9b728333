#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "econoscale/kwem.hpp"

namespace econoscale::wealth {

/// A sample of wealths, sorted ascending, over which distributions are fitted.
struct WealthSnapshot {
  std::uint64_t trade_count = 0;
  std::vector<double> wealths;  // ascending
  double mean_wealth = 0.0;

  static WealthSnapshot from_values(std::vector<double> values, std::uint64_t trade_count = 0);
  static WealthSnapshot from_population(const kwem::PopulationSnapshot& snap);
  /// Pools several snapshots into one time-averaged sample.
  static WealthSnapshot pooled(std::span<const kwem::PopulationSnapshot> snaps);
  static WealthSnapshot pooled(const kwem::AgentHistories& histories);

  std::size_t size() const noexcept { return wealths.size(); }
};

/// Gamma equilibrium density f_n(x) = (n / <x>) * xi^(n-1) e^(-xi) / Gamma(n),
/// xi = n x / <x>.
double equilibrium_pdf(double x, double n, double mean_wealth);
double equilibrium_cdf(double x, double n, double mean_wealth);

/// Shape of the equilibrium Gamma density for saving parameter lambda:
/// n(lambda) = 1 + 3 lambda / (1 - lambda).
double effective_shape(double lambda);

struct GammaFit {
  double shape_n = 0.0;
  double scale = 0.0;  // <x> / n
  double ks_stat = 0.0;
  double shape_stderr = 0.0;
  std::size_t sample_size = 0;
  /// "mle", or "moments" when zero-valued samples make the likelihood unbounded.
  std::string method;
};

/// Maximum-likelihood Gamma fit (Newton iteration on the profile likelihood,
/// started from the method-of-moments shape). Needs >= 100 samples.
/// Throws degenerate_input when all wealths are equal.
GammaFit fit_gamma(const WealthSnapshot& snapshot);
GammaFit fit_gamma(std::span<const double> values);

struct ParetoOptions {
  std::size_t min_tail = 50;     // samples at or above x_min
  double min_decades = 1.5;      // extent of the log-log regression range
  double min_r_squared = 0.98;   // straightness of the log-log survival function
  std::size_t max_candidates = 400;
  std::size_t min_upper_count = 10;  // survival points with fewer samples above are ignored
};

struct ParetoTailFit {
  double exponent = 0.0;  // index of the complementary CDF, P(X >= x) ~ x^-exponent
  double exponent_stderr = 0.0;
  double x_min = 0.0;
  double x_upper = 0.0;  // upper end of the regression range
  double ks_stat = 0.0;
  double r_squared = 0.0;
  double decades = 0.0;
  std::size_t tail_count = 0;
};

/// Power-law fit of the upper tail. x_min minimises the Kolmogorov-Smirnov
/// distance between the tail sample and the fitted Pareto law; the exponent is
/// the continuous maximum-likelihood estimate. x_upper is the end of the widest
/// range above x_min on which the log-log survival function is straight
/// (r^2 >= min_r_squared). Throws no_tail_detected when that range spans less
/// than `min_decades`.
ParetoTailFit fit_pareto_tail(const WealthSnapshot& snapshot, const ParetoOptions& options = {});

struct RelaxationEstimate {
  double lambda = 0.0;
  double tau_relax = 0.0;  // trades per agent
  double fit_r2 = 0.0;
  double plateau_std = 0.0;
};

/// Exponential approach of the wealth spread to its plateau. The variance
/// (squared standard deviation) is regressed as var(t) = var_eq (1 - e^(-t/tau))
/// with t in trades per agent. Throws not_converged when the spread never
/// rises or the trajectory ends before the plateau is reached.
RelaxationEstimate measure_relaxation(std::span<const WealthSnapshot> trajectory, double lambda);

/// Decay time (trades per agent) of the per-agent wealth autocorrelation in the
/// stationary state, i.e. how long an agent remembers its wealth. Deviations are
/// taken from each agent's own mean, which biases rho down by about 2 tau / T
/// for a record of length T, so only lags with rho >= 0.3 are fitted and the
/// record should span a few hundred tau.
RelaxationEstimate memory_time(const kwem::AgentHistories& histories, double lambda);

/// X = max_i x_i.
double wealth_cutoff(const WealthSnapshot& snapshot);

double gini(const WealthSnapshot& snapshot);

struct Histogram {
  std::vector<double> edges;    // bins + 1 ascending edges
  std::vector<double> counts;
  std::vector<double> density;  // counts / (total * width)
};

Histogram histogram(const WealthSnapshot& snapshot, std::size_t bins, bool logarithmic);

struct MixtureOptions {
  std::size_t min_samples = 100;
  std::size_t bins = 100;
};

struct MixtureDecomposition {
  std::vector<GammaFit> agent_fits;
  std::vector<double> agent_weights;  // share of the pooled sample
  std::vector<double> bin_edges;
  std::vector<double> empirical_density;
  std::vector<double> mixture_density;
  double l1_error = 0.0;  // sum over bins of |empirical mass - mixture mass|
};

/// Fits a Gamma density to each agent's time-sampled wealths and compares the
/// sample-weighted sum of those densities with the pooled histogram. Throws
/// insufficient_data naming the agents with fewer than min_samples samples.
MixtureDecomposition mixture_decomposition(const kwem::AgentHistories& histories,
                                           const MixtureOptions& options = {});

}  // namespace econoscale::wealth
