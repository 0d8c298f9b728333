#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace econoscale {

/// Ordinary (optionally weighted) least-squares line y = intercept + slope * x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  std::size_t points = 0;
};

/// Requires at least two points with distinct x. Empty `weights` means
/// unit weights.
LinearFit fit_line(std::span<const double> x, std::span<const double> y,
                   std::span<const double> weights = {});

/// Least-squares monotone (non-decreasing) fit by pool-adjacent-violators.
/// `y` must already be ordered by the abscissa.
std::vector<double> isotonic_increasing(std::span<const double> y,
                                        std::span<const double> weights = {});

double mean(std::span<const double> v);

/// Population variance (divides by n).
double variance(std::span<const double> v);

/// Linear-interpolated quantile of an ascending-sorted sample, q in [0, 1].
double sorted_quantile(std::span<const double> sorted, double q);

/// `count` logarithmically spaced values from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, std::size_t count);

}  // namespace econoscale
