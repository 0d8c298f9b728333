#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace econoscale::series {

/// Uniformly sampled signal. `sample_interval` is the cut-off scale tau_0;
/// samples before `first_usable` carry no valid value (e.g. the warm-up of a
/// trailing window) and are skipped by downstream analyses.
struct TimeSeries {
  std::vector<double> values;
  double sample_interval = 1.0;
  std::optional<std::vector<double>> volume;
  std::size_t first_usable = 0;
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return values.size(); }
  std::size_t usable_size() const noexcept {
    return values.size() > first_usable ? values.size() - first_usable : 0;
  }
  void validate() const;

  static TimeSeries from_values(std::vector<double> values, double sample_interval = 1.0);
};

// CSV format: header `t,value` or `t,value,volume`; `#` lines are comments.
// A comment `# sample_interval: <dt>` sets tau_0 (default 1.0). Timestamp gaps
// wider than 1.5x the median spacing are recorded in `warnings`.

TimeSeries parse_csv(std::istream& in, const std::string& source_name);
TimeSeries load_csv(const std::filesystem::path& path);
void write_csv(std::ostream& out, const TimeSeries& series);
void write_csv(const std::filesystem::path& path, const TimeSeries& series);

/// Trailing mean over the last `window` samples. The first window-1 outputs
/// are marked unusable via first_usable.
TimeSeries sliding_average(const TimeSeries& series, std::size_t window);

/// Trailing-window means aligned with the input; the first window-1 entries
/// are zero.
std::vector<double> trailing_means(const std::vector<double>& values, std::size_t window);

struct CascadeSpec {
  double p = 0.7;     // multiplier asymmetry, in (0, 1)
  int depth = 16;     // dyadic generations
  std::uint64_t seed = 0;

  void validate() const;
};

/// Binomial multiplicative cascade on the unit interval: each cell's mass is
/// split into fractions {p, 1-p} between its two halves, in random order,
/// `depth` times. Returns the cumulative mass path of 2^depth + 1 samples
/// from 0 to 1 with sample_interval 2^-depth, so window lengths convert to
/// scales tau = window * 2^-depth of the unit outer scale.
TimeSeries generate_binomial_cascade(const CascadeSpec& spec);

/// Cell masses of the cascade (2^depth entries summing to 1).
std::vector<double> binomial_cascade_masses(const CascadeSpec& spec);

/// Path of `length` samples whose increments are fractional Gaussian noise
/// with Hurst exponent `hurst` (exact circulant-embedding synthesis).
TimeSeries generate_fgn_path(double hurst, std::size_t length, std::uint64_t seed);

/// Fractional Gaussian noise itself (unit variance increments).
std::vector<double> generate_fgn(double hurst, std::size_t length, std::uint64_t seed);

/// i.i.d. standard normal samples; the memoryless negative control.
TimeSeries generate_white_noise(std::size_t length, std::uint64_t seed);

}  // namespace econoscale::series
