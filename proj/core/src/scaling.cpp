#include "econoscale/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "econoscale/error.hpp"
#include "econoscale/regression.hpp"

namespace econoscale::scaling {

namespace {

// Mean squared residual of a least-squares line through profile[b, b + s).
double detrended_variance(const std::vector<double>& profile, std::size_t b, std::size_t s) {
  const double n = static_cast<double>(s);
  const double mx = (n - 1.0) / 2.0;
  const double sxx = n * (n * n - 1.0) / 12.0;
  double sy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    sy += profile[b + i];
    sxy += static_cast<double>(i) * profile[b + i];
  }
  const double my = sy / n;
  const double slope = (sxy - n * mx * my) / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    const double r = profile[b + i] - my - slope * (static_cast<double>(i) - mx);
    ss += r * r;
  }
  return ss / n;
}

}  // namespace

HurstEstimate hurst_dfa(const series::TimeSeries& path, const DfaOptions& options) {
  const std::size_t begin = path.first_usable;
  const std::size_t len = path.usable_size();
  require(len >= 1024, "DFA needs at least 1024 samples, got " + std::to_string(len));
  const std::size_t steps = len - 1;
  const std::size_t smax = options.scale_max == 0 ? steps / 4 : options.scale_max;
  const std::size_t smin = options.scale_min;
  require(smin >= 4, "smallest DFA scale must be at least 4 samples");
  require(smax <= steps, "largest DFA scale exceeds the series");
  if (!(smax >= 10 * smin)) {
    fail(ErrorCode::invalid_argument, "DFA scale range [" + std::to_string(smin) + ", " +
                                          std::to_string(smax) + "] is narrower than a decade");
  }

  // Profile of the mean-removed increments.
  const double drift = (path.values[begin + steps] - path.values[begin]) / static_cast<double>(steps);
  std::vector<double> profile(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    profile[i] = path.values[begin + i + 1] - path.values[begin] - drift * static_cast<double>(i + 1);
  }

  const double decades = std::log10(static_cast<double>(smax) / static_cast<double>(smin));
  const auto count = static_cast<std::size_t>(std::ceil(decades * options.scales_per_decade)) + 1;
  std::vector<std::size_t> scales;
  for (double s : log_space(static_cast<double>(smin), static_cast<double>(smax), count)) {
    const auto v = static_cast<std::size_t>(std::llround(s));
    if (scales.empty() || v > scales.back()) scales.push_back(v);
  }

  HurstEstimate est;
  est.scale_min = scales.front();
  est.scale_max = scales.back();
  std::vector<double> lx, ly;
  for (auto s : scales) {
    const std::size_t nseg = steps / s;
    double total = 0.0;
    for (std::size_t k = 0; k < nseg; ++k) {
      total += detrended_variance(profile, k * s, s);
      total += detrended_variance(profile, steps - (k + 1) * s, s);
    }
    const double f = std::sqrt(total / static_cast<double>(2 * nseg));
    est.points.push_back({static_cast<double>(s), f, 2 * nseg});
    if (!(f > 0.0)) continue;
    lx.push_back(std::log(static_cast<double>(s)));
    ly.push_back(std::log(f));
  }
  // relative to the profile scale, a vanishing fluctuation is exact-linearity
  double scale_ref = 0.0;
  for (std::size_t i = 0; i < steps; ++i) {
    scale_ref = std::max(scale_ref, std::abs(path.values[begin + i + 1] - path.values[begin + i]));
  }
  double fmax = 0.0;
  for (const auto& p : est.points) fmax = std::max(fmax, p.fluctuation);
  if (lx.size() < 3 || fmax <= 1e-12 * std::max(scale_ref, std::numeric_limits<double>::min())) {
    fail(ErrorCode::degenerate_input, "degenerate: zero fluctuation after detrending");
  }

  const auto line = fit_line(lx, ly);
  est.h = line.slope;
  est.stderr_h = line.slope_stderr;
  est.r_squared = line.r_squared;
  if (!(est.h > 0.0 && est.h < 1.0)) {
    fail(ErrorCode::degenerate_input,
         "DFA exponent " + std::to_string(est.h) + " lies outside (0,1); the input is not a fractional-noise path");
  }
  return est;
}

double cascade_tau(double q, double p) {
  return -std::log2(std::pow(p, q) + std::pow(1.0 - p, q));
}

double SpectrumCurve::at(double h) const {
  if (h_values.empty() || h < h_values.front() || h > h_values.back()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (h_values.size() == 1) return f_values.front();
  const auto it = std::upper_bound(h_values.begin(), h_values.end(), h);
  if (it == h_values.end()) return f_values.back();
  const auto i = static_cast<std::size_t>(it - h_values.begin());
  const double t = (h - h_values[i - 1]) / (h_values[i] - h_values[i - 1]);
  return f_values[i - 1] + t * (f_values[i] - f_values[i - 1]);
}

SpectrumCurve cascade_spectrum(double p) {
  require(p > 0.0 && p < 1.0, "cascade p must lie in (0,1)");
  SpectrumCurve curve;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (p == 0.5) {
    curve.q_values = {0.0};
    curve.h_values = {1.0};
    curve.f_values = {1.0};
    return curve;
  }
  // f depends on the unordered pair {p, 1-p}; fixing the order makes the
  // spectra of p and 1-p bit-identical.
  const double a = std::max(p, 1.0 - p);
  const double b = 1.0 - a;
  const double la = std::log(a);
  const double lb = std::log(b);

  const double h_min = -std::log2(a);
  const double h_max = -std::log2(b);
  curve.q_values.push_back(nan);
  curve.h_values.push_back(h_min);
  curve.f_values.push_back(0.0);
  // q descending gives h ascending
  for (int k = 200; k >= -200; --k) {
    const double q = 0.05 * k;
    // weights of the two branches, normalised to avoid overflow at large |q|
    const double r = std::exp(q * (lb - la));  // (b/a)^q
    const double wa = 1.0 / (1.0 + r);
    const double wb = r / (1.0 + r);
    const double h = -(wa * la + wb * lb) / std::log(2.0);
    const double tau = -(q * la + std::log1p(r)) / std::log(2.0);
    const double f = q * h - tau;
    if (h <= curve.h_values.back() + 1e-12 || h >= h_max - 1e-12) continue;
    curve.q_values.push_back(q);
    curve.h_values.push_back(h);
    curve.f_values.push_back(f);
  }
  curve.q_values.push_back(nan);
  curve.h_values.push_back(h_max);
  curve.f_values.push_back(0.0);
  return curve;
}

}  // namespace econoscale::scaling
