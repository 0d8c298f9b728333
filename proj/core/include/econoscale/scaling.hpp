#pragma once

#include <cstddef>
#include <vector>

#include "econoscale/series.hpp"

namespace econoscale::scaling {

struct DfaPoint {
  double scale = 0.0;        // window size in samples
  double fluctuation = 0.0;  // root-mean-square residual after linear detrending
  std::size_t segments = 0;
};

struct HurstEstimate {
  double h = 0.0;
  double stderr_h = 0.0;
  double r_squared = 0.0;
  std::size_t scale_min = 0;
  std::size_t scale_max = 0;
  std::vector<DfaPoint> points;
};

struct DfaOptions {
  std::size_t scale_min = 16;
  std::size_t scale_max = 0;  // 0: a quarter of the series length
  double scales_per_decade = 10.0;
};

/// First-order detrended fluctuation analysis of the increments of `path`.
/// The profile of the increments is the mean-adjusted path, so a linear path
/// has zero fluctuation (throws degenerate_input) and affine maps of the path
/// leave h unchanged. Needs >= 1024 samples and a scale range of a decade.
HurstEstimate hurst_dfa(const series::TimeSeries& path, const DfaOptions& options = {});

/// f(h) of the binomial cascade as a parametric curve, ordered by h.
struct SpectrumCurve {
  std::vector<double> q_values;  // Legendre parameter; NaN at the analytic endpoints
  std::vector<double> h_values;
  std::vector<double> f_values;

  /// Linear interpolation of f at h; NaN outside the support.
  double at(double h) const;
  double h_min() const { return h_values.front(); }
  double h_max() const { return h_values.back(); }
};

/// Mass exponent tau(q) = -log2(p^q + (1-p)^q).
double cascade_tau(double q, double p);

/// Legendre transform f(h) = q h - tau(q), h = tau'(q), over q in [-10, 10]
/// with step 0.05, plus the endpoints h_min = -log2 max(p, 1-p) and
/// h_max = -log2 min(p, 1-p) where f = 0. p = 0.5 yields the single point (1, 1).
SpectrumCurve cascade_spectrum(double p);

}  // namespace econoscale::scaling
