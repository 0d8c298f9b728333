#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "econoscale/series.hpp"

namespace econoscale::mlvp {

enum class Mode { absolute, relative };
enum class Censoring { include, exclude };
enum class Combine { both_quiet, either_quiet };

/// Threshold delta and trailing window (in samples) of the quiet condition
/// |x - <x>_tau| <= delta. Relative mode divides the deviation by <x>_tau.
struct MlvpConfig {
  double delta = 0.0;
  std::size_t window = 1;
  Mode mode = Mode::absolute;

  void validate() const;
};

/// Maximal run of quiet samples [start, start + length).
struct Period {
  std::size_t start = 0;
  std::size_t length = 0;
  bool censored = false;  // cut by the end of the series

  std::size_t end() const noexcept { return start + length; }
  friend bool operator==(const Period&, const Period&) = default;
};

struct LowVarPeriods {
  std::vector<Period> periods;
  std::size_t series_length = 0;
  std::size_t usable_start = 0;  // first index where the trailing mean exists
  MlvpConfig config;

  std::vector<std::size_t> lengths(Censoring censoring) const;
  std::size_t uncensored_count() const noexcept;
};

/// |x - <x>_tau| (or its relative version) for every usable index; earlier
/// entries are 0. Relative mode throws invalid_argument naming the first
/// index with a non-positive trailing mean.
std::vector<double> deviations(const series::TimeSeries& series, std::size_t window, Mode mode);

/// Index of the first sample covered by the trailing window.
std::size_t usable_start(const series::TimeSeries& series, std::size_t window);

/// Maximal runs of `quiet` from `begin` onwards. The run touching the end is
/// flagged as censored.
std::vector<Period> runs(std::span<const char> quiet, std::size_t begin);

LowVarPeriods extract_periods(const series::TimeSeries& series, const MlvpConfig& config);

/// Same as extract_periods, reusing precomputed deviations.
LowVarPeriods periods_from_deviations(std::span<const double> dev, std::size_t begin,
                                      const MlvpConfig& config);

/// R(n) = number of periods with length >= n, for n = 1..max length.
/// Counts are stored as reals so that model curves can be fitted too.
struct SurvivalCurve {
  std::vector<double> n_values;
  std::vector<double> counts;

  std::size_t size() const noexcept { return n_values.size(); }
};

SurvivalCurve survival_curve(const LowVarPeriods& periods, Censoring censoring = Censoring::exclude);
SurvivalCurve survival_curve(std::span<const std::size_t> lengths);

struct ScalingFit {
  double alpha = 0.0;
  double r0 = 0.0;
  double n_min = 0.0;
  double n_max = 0.0;
  double r_squared = 0.0;      // of log R against log n
  double exp_r_squared = 0.0;  // of log R against n (exponential alternative)
  std::size_t points = 0;
  bool automatic_range = false;
};

/// Power-law acceptance rule: a straight log-log survival function over at
/// least a decade that also beats the exponential alternative.
struct ScalingGate {
  double min_r_squared = 0.85;
  double min_decades = 1.0;

  bool accepts(const ScalingFit& fit) const;
};

/// Least squares of log R on log n over logarithmically spaced points
/// (about 10 per decade) in [n_min, n_max]. Zero counts are skipped; fewer
/// than 5 usable points throws insufficient_data.
ScalingFit fit_scaling(const SurvivalCurve& curve, double n_min, double n_max);

/// Default range n in [2, length of the 5th-longest period].
ScalingFit fit_scaling(const SurvivalCurve& curve);

struct CollapseOptions {
  Mode mode = Mode::absolute;
  Censoring censoring = Censoring::exclude;
  std::size_t min_periods = 30;
  ScalingGate gate;
  unsigned threads = 1;
};

struct CollapseCell {
  double delta = 0.0;
  std::size_t window = 0;
  double u = 0.0;  // ln delta / ln(window * sample_interval)
  ScalingFit fit;
  std::size_t period_count = 0;
  bool power_law = false;
};

struct DroppedCell {
  double delta = 0.0;
  std::size_t window = 0;
  std::string reason;
};

struct CollapseResult {
  std::vector<CollapseCell> cells;  // grid order: windows outer, deltas inner
  std::vector<DroppedCell> dropped;
  std::vector<double> sorted_u;     // retained cells ordered by u
  std::vector<double> monotone_alpha;
  double quality = 0.0;
  bool increasing = true;           // direction of the monotone fit
  std::size_t power_law_cells = 0;

  /// Multifractal collapse: every retained cell scales and quality > threshold.
  bool collapses(double threshold = 0.9) const;
};

/// Scaling exponent alpha(delta, tau) for each grid cell, plotted against
/// u = log_tau delta with tau = window * sample_interval. Quality is
/// 1 - var(alpha - m(u)) / var(alpha), m being the least-squares monotone fit.
/// Needs >= 3 windows, >= 3 deltas and >= 3 retained cells, otherwise
/// throws insufficient_data "grid too small".
CollapseResult collapse_test(const series::TimeSeries& series, std::span<const double> deltas,
                             std::span<const std::size_t> windows,
                             const CollapseOptions& options = {});

/// Log-spaced thresholds between the 10th and 90th percentile of the
/// deviations, pooled over the given windows.
std::vector<double> default_deltas(const series::TimeSeries& series,
                                   std::span<const std::size_t> windows, Mode mode,
                                   std::size_t count);

struct HazardBin {
  std::size_t ell_lo = 0;  // inclusive
  std::size_t ell_hi = 0;  // exclusive
  double ell_center = 0.0;
  double events = 0.0;
  double at_risk = 0.0;    // sum over the bin of periods still running at ell
  double hazard = 0.0;     // events / at_risk
};

struct HazardOptions {
  std::size_t ell_min = 0;          // 0: the window length
  double bins_per_decade = 8.0;
  double min_at_risk = 20.0;        // periods reaching a bin's lower edge
};

struct HazardCurve {
  std::vector<HazardBin> bins;
  std::vector<double> raw_ell;      // 1..max length
  std::vector<double> raw_hazard;   // per length; NaN where nobody is at risk
  std::vector<double> raw_events;
  std::vector<double> raw_at_risk;
  std::size_t merged_bins = 0;
  std::size_t empty_bins = 0;       // bins without events, left out of the slope fit
  double slope = 0.0;               // log hazard against log ell
  double slope_stderr = 0.0;
  double r_squared = 0.0;
};

/// Probability that a quiet period ends at exactly length ell given that it
/// lasted ell samples. Censored periods count as at risk up to their observed
/// length but never as events. Sparse tail bins are merged into their
/// predecessor.
HazardCurve hazard_from_periods(std::span<const Period> periods, const HazardOptions& options);
HazardCurve silence_breaking_hazard(const series::TimeSeries& series, const MlvpConfig& config,
                                    HazardOptions options = {});

/// Two-channel quiet periods. Each channel uses its own threshold (window and
/// mode from its config); the masks are intersected (both_quiet) or joined
/// (either_quiet) over the range where both trailing means exist.
LowVarPeriods multivariate_periods(const series::TimeSeries& price, const series::TimeSeries& volume,
                                   const MlvpConfig& price_config, const MlvpConfig& volume_config,
                                   Combine combine);
/// Same, taking the volume channel of `price`.
LowVarPeriods multivariate_periods(const series::TimeSeries& price, const MlvpConfig& price_config,
                                   const MlvpConfig& volume_config, Combine combine);

}  // namespace econoscale::mlvp
