#include "econoscale/wealth_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "econoscale/error.hpp"
#include "econoscale/regression.hpp"

namespace econoscale::wealth {

namespace {

double sum_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Kolmogorov-Smirnov distance between a sorted sample and a continuous CDF.
template <class Cdf>
double ks_distance(std::span<const double> sorted, Cdf&& cdf) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

}  // namespace

WealthSnapshot WealthSnapshot::from_values(std::vector<double> values, std::uint64_t trade_count) {
  require(!values.empty(), "wealth snapshot is empty");
  for (double v : values) require(std::isfinite(v) && v >= 0.0, "wealths must be finite and >= 0");
  WealthSnapshot s;
  s.trade_count = trade_count;
  std::sort(values.begin(), values.end());
  s.mean_wealth = sum_of(values) / static_cast<double>(values.size());
  s.wealths = std::move(values);
  return s;
}

WealthSnapshot WealthSnapshot::from_population(const kwem::PopulationSnapshot& snap) {
  return from_values(snap.wealths, snap.trade_count);
}

WealthSnapshot WealthSnapshot::pooled(std::span<const kwem::PopulationSnapshot> snaps) {
  require(!snaps.empty(), "no snapshots to pool");
  std::vector<double> all;
  for (const auto& s : snaps) all.insert(all.end(), s.wealths.begin(), s.wealths.end());
  return from_values(std::move(all), snaps.back().trade_count);
}

WealthSnapshot WealthSnapshot::pooled(const kwem::AgentHistories& histories) {
  std::vector<double> all;
  for (const auto& s : histories.samples) all.insert(all.end(), s.begin(), s.end());
  return from_values(std::move(all));
}

double equilibrium_pdf(double x, double n, double mean_wealth) {
  require(n > 0.0, "shape n must be positive");
  require(mean_wealth > 0.0, "mean wealth must be positive");
  require(x >= 0.0, "wealth must be non-negative");
  const double rate = n / mean_wealth;
  if (x == 0.0) {
    if (n < 1.0) return std::numeric_limits<double>::infinity();
    return n == 1.0 ? rate : 0.0;
  }
  const double xi = rate * x;
  return rate * std::exp((n - 1.0) * std::log(xi) - xi - std::lgamma(n));
}

double equilibrium_cdf(double x, double n, double mean_wealth) {
  require(n > 0.0 && mean_wealth > 0.0, "shape and mean must be positive");
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(n, n * x / mean_wealth);
}

double effective_shape(double lambda) {
  require(lambda >= 0.0 && lambda < 1.0, "saving parameter lambda must lie in [0,1)");
  return (1.0 + 2.0 * lambda) / (1.0 - lambda);
}

GammaFit fit_gamma(std::span<const double> values) {
  if (values.size() < 100) {
    fail(ErrorCode::insufficient_data,
         "Gamma fit needs at least 100 samples, got " + std::to_string(values.size()));
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  require(sorted.front() >= 0.0, "Gamma fit needs non-negative samples");

  const double n = static_cast<double>(sorted.size());
  const double m = sum_of(sorted) / n;
  const double var = variance(sorted);
  if (!(m > 0.0) || sorted.back() - sorted.front() <= 1e-12 * m || var <= 0.0) {
    fail(ErrorCode::degenerate_input, "degenerate: point mass (all wealths equal)");
  }

  GammaFit fit;
  fit.sample_size = sorted.size();
  double k = m * m / var;
  if (sorted.front() == 0.0) {
    fit.method = "moments";
  } else {
    fit.method = "mle";
    double mean_log = 0.0;
    for (double x : sorted) mean_log += std::log(x);
    mean_log /= n;
    const double s = std::log(m) - mean_log;  // > 0 by Jensen
    for (int it = 0; it < 100; ++it) {
      const double g = std::log(k) - boost::math::digamma(k) - s;
      const double dg = 1.0 / k - boost::math::trigamma(k);
      double next = k - g / dg;
      if (!(next > 0.0)) next = k / 2.0;
      const bool done = std::abs(next - k) <= 1e-12 * k;
      k = next;
      if (done) break;
    }
  }
  fit.shape_n = k;
  fit.scale = m / k;
  fit.shape_stderr = std::sqrt(k / (n * (k * boost::math::trigamma(k) - 1.0)));
  fit.ks_stat = ks_distance(sorted, [&](double x) { return equilibrium_cdf(x, k, m); });
  return fit;
}

GammaFit fit_gamma(const WealthSnapshot& snapshot) { return fit_gamma(snapshot.wealths); }

ParetoTailFit fit_pareto_tail(const WealthSnapshot& snapshot, const ParetoOptions& options) {
  const auto& x = snapshot.wealths;
  const std::size_t n = x.size();
  if (n < 2 * options.min_tail) {
    fail(ErrorCode::insufficient_data, "Pareto fit needs at least " +
                                           std::to_string(2 * options.min_tail) + " samples");
  }

  // suffix sums of log x over positive entries
  std::vector<double> log_x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) log_x[i] = x[i] > 0.0 ? std::log(x[i]) : 0.0;
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + log_x[i];

  // Upper end of the usable range: min_upper_count samples must lie at or above it.
  const std::size_t upper_index = n - std::min(n, options.min_upper_count);
  const double x_upper = x[upper_index];

  const std::size_t last_start = n - options.min_tail;
  const std::size_t step = std::max<std::size_t>(1, last_start / options.max_candidates);

  ParetoTailFit best;
  best.ks_stat = std::numeric_limits<double>::infinity();
  bool found = false;
  std::size_t prev_start = n;

  for (std::size_t start = 0; start <= last_start; start += step) {
    // first occurrence of this value so ties stay inside the tail
    std::size_t i = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), x[start]) - x.begin());
    if (i == prev_start) continue;
    prev_start = i;
    const double x_min = x[i];
    if (!(x_min > 0.0)) continue;
    if (std::log10(x_upper / x_min) < options.min_decades) break;

    const std::size_t m = n - i;
    const double log_sum = suffix[i] - static_cast<double>(m) * std::log(x_min);
    if (!(log_sum > 0.0)) continue;
    const double a = static_cast<double>(m) / log_sum;

    // KS over the tail, evaluated on a rank stride for very long tails.
    const std::size_t stride = std::max<std::size_t>(1, m / 20000);
    const double md = static_cast<double>(m);
    const double lx_min = std::log(x_min);
    double d = 0.0;
    for (std::size_t r = 0; r < m; r += stride) {
      const double f = 1.0 - std::exp(-a * (log_x[i + r] - lx_min));
      d = std::max({d, f - static_cast<double>(r) / md, static_cast<double>(r + 1) / md - f});
    }
    if (d < best.ks_stat) {
      best.ks_stat = d;
      best.exponent = a;
      best.exponent_stderr = a / std::sqrt(md);
      best.x_min = x_min;
      best.tail_count = m;
      found = true;
    }
  }
  if (!found) {
    fail(ErrorCode::no_tail_detected, "no tail detected: sample spans less than " +
                                          std::to_string(options.min_decades) + " decades");
  }

  // Straight part of the empirical survival function on log-log axes: the
  // widest range [x_min, x_upper] with r^2 >= min_r_squared. The cutoff above
  // it bends the survival function down and is left out.
  const double span_decades = std::log10(x_upper / best.x_min);
  const auto count = static_cast<std::size_t>(std::ceil(20.0 * span_decades)) + 1;
  const auto grid = log_space(best.x_min, x_upper, std::max<std::size_t>(count, 2));
  std::vector<double> lx, ls;
  for (double g : grid) {
    const auto above = static_cast<double>(x.end() - std::lower_bound(x.begin(), x.end(), g));
    lx.push_back(std::log(g));
    ls.push_back(std::log(above / static_cast<double>(n)));
  }
  LinearFit line;
  std::size_t k = lx.size();
  for (; k >= 3; --k) {
    line = fit_line(std::span<const double>(lx).first(k), std::span<const double>(ls).first(k));
    if (line.r_squared >= options.min_r_squared) break;
  }
  best.r_squared = line.r_squared;
  best.x_upper = grid[std::max<std::size_t>(k, 1) - 1];
  best.decades = std::log10(best.x_upper / best.x_min);
  if (k < 3 || best.r_squared < options.min_r_squared) {
    fail(ErrorCode::no_tail_detected,
         "no tail detected: the log-log survival function is not straight (r^2 = " +
             std::to_string(best.r_squared) + ")");
  }
  if (best.decades < options.min_decades) {
    fail(ErrorCode::no_tail_detected, "no tail detected: straight region spans only " +
                                          std::to_string(best.decades) + " decades");
  }
  return best;
}

RelaxationEstimate measure_relaxation(std::span<const WealthSnapshot> trajectory, double lambda) {
  require(trajectory.size() >= 8, "relaxation trajectory needs at least 8 snapshots");
  const double agents = static_cast<double>(trajectory.front().size());

  std::vector<double> t, var;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    if (i > 0) {
      require(trajectory[i].trade_count > trajectory[i - 1].trade_count,
              "trajectory trade counts must increase");
    }
    t.push_back(static_cast<double>(trajectory[i].trade_count) / agents);
    var.push_back(variance(trajectory[i].wealths));
  }

  const std::size_t tail = std::max<std::size_t>(2, var.size() / 4);
  const double plateau =
      mean(std::span<const double>(var).subspan(var.size() - tail));
  const double scale = trajectory.front().mean_wealth;
  if (!(plateau > 1e-12 * scale * scale)) {
    fail(ErrorCode::not_converged, "transient not completed: wealth spread never rises");
  }

  std::vector<double> ft, fy;
  for (std::size_t i = 0; i < var.size(); ++i) {
    const double gap = 1.0 - var[i] / plateau;
    if (gap < 0.1) break;
    ft.push_back(t[i]);
    fy.push_back(std::log(gap));
  }
  if (ft.size() < 4) {
    fail(ErrorCode::not_converged, "transient not resolved: fewer than 4 snapshots before plateau");
  }
  const auto line = fit_line(ft, fy);
  if (!(line.slope < 0.0)) {
    fail(ErrorCode::not_converged, "transient not completed: spread does not approach a plateau");
  }
  RelaxationEstimate est;
  est.lambda = lambda;
  est.tau_relax = -1.0 / line.slope;
  est.fit_r2 = line.r_squared;
  est.plateau_std = std::sqrt(plateau);
  if (t.back() - t.front() < 5.0 * est.tau_relax) {
    fail(ErrorCode::not_converged, "transient not completed: trajectory shorter than 5 tau");
  }
  return est;
}

RelaxationEstimate memory_time(const kwem::AgentHistories& histories, double lambda) {
  require(histories.agents() >= 1, "no agent histories");
  const std::size_t len = histories.samples.front().size();
  require(len >= 16, "memory time needs at least 16 samples per agent");
  const double spacing =
      static_cast<double>(histories.trades_between_samples) / static_cast<double>(histories.agents());

  std::vector<std::vector<double>> dev;
  dev.reserve(histories.agents());
  double c0 = 0.0;
  for (const auto& s : histories.samples) {
    require(s.size() == len, "agent histories differ in length");
    const double m = mean(s);
    auto& d = dev.emplace_back(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
      d[k] = s[k] - m;
      c0 += d[k] * d[k];
    }
  }
  if (!(c0 > 0.0)) fail(ErrorCode::not_converged, "agent wealths never change");
  c0 /= static_cast<double>(len);

  std::vector<double> lag_t, log_c;
  for (std::size_t lag = 1; lag < len / 4; ++lag) {
    double c = 0.0;
    for (const auto& d : dev) {
      for (std::size_t k = 0; k + lag < len; ++k) c += d[k] * d[k + lag];
    }
    c /= static_cast<double>(len - lag);
    const double rho = c / c0;
    if (rho < 0.3) break;
    lag_t.push_back(static_cast<double>(lag) * spacing);
    log_c.push_back(std::log(rho));
  }
  if (lag_t.size() < 3) {
    fail(ErrorCode::insufficient_data, "sampling too sparse to resolve the wealth memory");
  }
  const auto line = fit_line(lag_t, log_c);
  require(line.slope < 0.0, "wealth autocorrelation does not decay");
  return {lambda, -1.0 / line.slope, line.r_squared, std::sqrt(c0 / static_cast<double>(dev.size()))};
}

double wealth_cutoff(const WealthSnapshot& snapshot) {
  require(!snapshot.wealths.empty(), "empty snapshot");
  return snapshot.wealths.back();
}

double gini(const WealthSnapshot& snapshot) {
  const auto& x = snapshot.wealths;
  require(!x.empty(), "empty snapshot");
  const double n = static_cast<double>(x.size());
  const double total = sum_of(x);
  require(total > 0.0, "Gini coefficient undefined for zero total wealth");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += (2.0 * static_cast<double>(i) - n + 1.0) * x[i];
  }
  return acc / (n * total);
}

Histogram histogram(const WealthSnapshot& snapshot, std::size_t bins, bool logarithmic) {
  require(bins >= 1, "histogram needs at least one bin");
  const auto& x = snapshot.wealths;
  require(!x.empty(), "empty snapshot");
  Histogram h;
  const double hi = x.back() > 0.0 ? x.back() : 1.0;
  if (logarithmic) {
    const auto first_positive = std::upper_bound(x.begin(), x.end(), 0.0);
    const double lo = first_positive != x.end() ? *first_positive : hi / 10.0;
    h.edges = log_space(lo, hi, bins + 1);
    h.edges.front() = 0.0;
  } else {
    h.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) {
      h.edges[b] = hi * static_cast<double>(b) / static_cast<double>(bins);
    }
  }
  h.counts.assign(bins, 0.0);
  for (double v : x) {
    auto it = std::upper_bound(h.edges.begin(), h.edges.end(), v);
    std::size_t b = it == h.edges.begin() ? 0 : static_cast<std::size_t>(it - h.edges.begin()) - 1;
    h.counts[std::min(b, bins - 1)] += 1.0;
  }
  h.density.resize(bins);
  const double total = static_cast<double>(x.size());
  for (std::size_t b = 0; b < bins; ++b) {
    const double w = h.edges[b + 1] - h.edges[b];
    h.density[b] = w > 0.0 ? h.counts[b] / (total * w) : 0.0;
  }
  return h;
}

MixtureDecomposition mixture_decomposition(const kwem::AgentHistories& histories,
                                           const MixtureOptions& options) {
  require(histories.agents() >= 1, "no agent histories");
  std::vector<std::size_t> undersampled;
  for (std::size_t i = 0; i < histories.agents(); ++i) {
    if (histories.samples[i].size() < options.min_samples) undersampled.push_back(i);
  }
  if (!undersampled.empty()) {
    std::string msg = std::to_string(undersampled.size()) + " agents have fewer than " +
                      std::to_string(options.min_samples) + " samples: ";
    for (std::size_t k = 0; k < std::min<std::size_t>(undersampled.size(), 10); ++k) {
      msg += (k ? "," : "") + std::to_string(undersampled[k]);
    }
    if (undersampled.size() > 10) msg += ",...";
    fail(ErrorCode::insufficient_data, msg);
  }

  MixtureDecomposition out;
  double total = 0.0;
  for (const auto& s : histories.samples) total += static_cast<double>(s.size());
  for (const auto& s : histories.samples) {
    out.agent_fits.push_back(fit_gamma(s));
    out.agent_weights.push_back(static_cast<double>(s.size()) / total);
  }

  const auto pooled = WealthSnapshot::pooled(histories);
  const auto& x = pooled.wealths;
  const double lo = std::max(sorted_quantile(x, 0.001), 1e-12 * pooled.mean_wealth);
  out.bin_edges = log_space(lo, std::max(x.back(), lo * 1.0001), options.bins);
  out.bin_edges.insert(out.bin_edges.begin(), 0.0);
  const std::size_t bins = out.bin_edges.size() - 1;

  std::vector<double> emp_mass(bins, 0.0);
  for (double v : x) {
    auto it = std::upper_bound(out.bin_edges.begin(), out.bin_edges.end(), v);
    std::size_t b = static_cast<std::size_t>(it - out.bin_edges.begin()) - 1;
    emp_mass[std::min(b, bins - 1)] += 1.0 / total;
  }

  std::vector<double> mix_cdf(out.bin_edges.size(), 0.0);
  for (std::size_t i = 0; i < out.agent_fits.size(); ++i) {
    const auto& f = out.agent_fits[i];
    const double m = f.shape_n * f.scale;
    for (std::size_t e = 1; e < out.bin_edges.size(); ++e) {
      mix_cdf[e] += out.agent_weights[i] * equilibrium_cdf(out.bin_edges[e], f.shape_n, m);
    }
  }

  out.empirical_density.resize(bins);
  out.mixture_density.resize(bins);
  double l1 = 1.0 - mix_cdf.back();  // mixture mass beyond the largest sample
  for (std::size_t b = 0; b < bins; ++b) {
    const double width = out.bin_edges[b + 1] - out.bin_edges[b];
    const double mix_mass = mix_cdf[b + 1] - mix_cdf[b];
    l1 += std::abs(emp_mass[b] - mix_mass);
    out.empirical_density[b] = emp_mass[b] / width;
    out.mixture_density[b] = mix_mass / width;
  }
  out.l1_error = l1;
  return out;
}

}  // namespace econoscale::wealth
