#include "econoscale/mlvp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "econoscale/error.hpp"
#include "econoscale/regression.hpp"

namespace econoscale::mlvp {

using series::TimeSeries;

void MlvpConfig::validate() const {
  require(std::isfinite(delta) && delta > 0.0, "delta must be positive");
  require(window >= 1, "window must be at least 1 sample");
}

std::vector<std::size_t> LowVarPeriods::lengths(Censoring censoring) const {
  std::vector<std::size_t> out;
  out.reserve(periods.size());
  for (const auto& p : periods) {
    if (p.censored && censoring == Censoring::exclude) continue;
    out.push_back(p.length);
  }
  return out;
}

std::size_t LowVarPeriods::uncensored_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(periods.begin(), periods.end(), [](const Period& p) { return !p.censored; }));
}

std::size_t usable_start(const TimeSeries& series, std::size_t window) {
  require(window >= 1, "window must be at least 1 sample");
  require(series.usable_size() > window, "series must be longer than the window");
  return series.first_usable + window - 1;
}

std::vector<double> deviations(const TimeSeries& series, std::size_t window, Mode mode) {
  const std::size_t begin = usable_start(series, window);
  const auto means = series::trailing_means(series.values, window);
  std::vector<double> dev(series.size(), 0.0);
  for (std::size_t i = begin; i < series.size(); ++i) {
    const double d = std::abs(series.values[i] - means[i]);
    if (mode == Mode::relative) {
      if (!(means[i] > 0.0)) {
        fail(ErrorCode::invalid_argument,
             "relative mode needs a positive sliding mean; mean is " + std::to_string(means[i]) +
                 " at index " + std::to_string(i));
      }
      dev[i] = d / means[i];
    } else {
      dev[i] = d;
    }
  }
  return dev;
}

std::vector<Period> runs(std::span<const char> quiet, std::size_t begin) {
  std::vector<Period> out;
  std::size_t i = begin;
  while (i < quiet.size()) {
    if (!quiet[i]) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < quiet.size() && quiet[i]) ++i;
    out.push_back({start, i - start, i == quiet.size()});
  }
  return out;
}

LowVarPeriods periods_from_deviations(std::span<const double> dev, std::size_t begin,
                                      const MlvpConfig& config) {
  std::vector<char> quiet(dev.size(), 0);
  for (std::size_t i = begin; i < dev.size(); ++i) quiet[i] = dev[i] <= config.delta;
  LowVarPeriods out;
  out.periods = runs(quiet, begin);
  out.series_length = dev.size();
  out.usable_start = begin;
  out.config = config;
  return out;
}

LowVarPeriods extract_periods(const TimeSeries& series, const MlvpConfig& config) {
  config.validate();
  series.validate();
  const auto dev = deviations(series, config.window, config.mode);
  return periods_from_deviations(dev, usable_start(series, config.window), config);
}

SurvivalCurve survival_curve(std::span<const std::size_t> lengths) {
  if (lengths.empty()) fail(ErrorCode::insufficient_data, "no periods to build a survival curve from");
  const std::size_t max_len = *std::max_element(lengths.begin(), lengths.end());
  std::vector<double> ending(max_len + 2, 0.0);
  for (auto l : lengths) ending[l] += 1.0;
  SurvivalCurve c;
  c.n_values.resize(max_len);
  c.counts.resize(max_len);
  double above = 0.0;
  for (std::size_t n = max_len; n >= 1; --n) {
    above += ending[n];
    c.n_values[n - 1] = static_cast<double>(n);
    c.counts[n - 1] = above;
  }
  // zero-length periods do not exist, so R(1) is the total count
  return c;
}

SurvivalCurve survival_curve(const LowVarPeriods& periods, Censoring censoring) {
  const auto l = periods.lengths(censoring);
  return survival_curve(l);
}

bool ScalingGate::accepts(const ScalingFit& fit) const {
  return fit.r_squared >= min_r_squared && fit.r_squared > fit.exp_r_squared &&
         std::log10(fit.n_max / fit.n_min) >= min_decades;
}

ScalingFit fit_scaling(const SurvivalCurve& curve, double n_min, double n_max) {
  require(n_min > 0.0 && n_min < n_max, "fit range must satisfy 0 < n_min < n_max");
  require(curve.n_values.size() == curve.counts.size(), "survival curve columns differ in length");

  const double decades = std::log10(n_max / n_min);
  const auto count = static_cast<std::size_t>(std::max(2.0, std::ceil(10.0 * decades) + 1.0));
  std::vector<std::size_t> picked;
  for (double target : log_space(n_min, n_max, count)) {
    // nearest curve abscissa to the log-spaced target
    const auto it = std::lower_bound(curve.n_values.begin(), curve.n_values.end(), target);
    std::size_t idx = static_cast<std::size_t>(it - curve.n_values.begin());
    if (idx == curve.n_values.size() ||
        (idx > 0 && target - curve.n_values[idx - 1] < curve.n_values[idx] - target)) {
      if (idx == 0) continue;
      --idx;
    }
    const double n = curve.n_values[idx];
    if (n < n_min || n > n_max || !(curve.counts[idx] > 0.0)) continue;
    if (picked.empty() || picked.back() != idx) picked.push_back(idx);
  }
  if (picked.size() < 5) {
    fail(ErrorCode::insufficient_data, "need at least 5 survival points with positive counts in [" +
                                           std::to_string(n_min) + ", " + std::to_string(n_max) +
                                           "], got " + std::to_string(picked.size()));
  }

  std::vector<double> log_n, n, log_r;
  for (auto idx : picked) {
    n.push_back(curve.n_values[idx]);
    log_n.push_back(std::log(curve.n_values[idx]));
    log_r.push_back(std::log(curve.counts[idx]));
  }
  const auto power = fit_line(log_n, log_r);
  const auto expo = fit_line(n, log_r);

  ScalingFit fit;
  fit.alpha = -power.slope;
  fit.r0 = std::exp(power.intercept);
  fit.n_min = n.front();
  fit.n_max = n.back();
  fit.r_squared = power.r_squared;
  fit.exp_r_squared = expo.r_squared;
  fit.points = picked.size();
  return fit;
}

ScalingFit fit_scaling(const SurvivalCurve& curve) {
  double n_max = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve.counts[i] >= 5.0) n_max = std::max(n_max, curve.n_values[i]);
  }
  if (n_max <= 2.0) {
    fail(ErrorCode::insufficient_data,
         "the 5th-longest period is too short for the default fit range [2, n5]");
  }
  auto fit = fit_scaling(curve, 2.0, n_max);
  fit.automatic_range = true;
  return fit;
}

bool CollapseResult::collapses(double threshold) const {
  return !cells.empty() && power_law_cells == cells.size() && quality > threshold;
}

namespace {

double residual_ss(std::span<const double> y, std::span<const double> fit) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - fit[i]) * (y[i] - fit[i]);
  return s;
}

}  // namespace

CollapseResult collapse_test(const TimeSeries& series, std::span<const double> deltas,
                             std::span<const std::size_t> windows, const CollapseOptions& options) {
  if (windows.size() < 3 || deltas.size() < 3) {
    fail(ErrorCode::insufficient_data,
         "grid too small: need at least 3 windows and 3 deltas, got " +
             std::to_string(windows.size()) + "x" + std::to_string(deltas.size()));
  }
  series.validate();
  for (double d : deltas) require(std::isfinite(d) && d > 0.0, "deltas must be positive");
  for (auto w : windows) {
    require(w >= 1, "windows must be at least 1 sample");
    require(std::abs(std::log(static_cast<double>(w) * series.sample_interval)) > 1e-12,
            "window " + std::to_string(w) + " equals the unit time scale, log_tau is undefined");
  }

  struct Slot {
    bool kept = false;
    CollapseCell cell;
    DroppedCell dropped;
  };
  const std::size_t nd = deltas.size();
  std::vector<Slot> slots(windows.size() * nd);
  std::vector<std::vector<double>> devs(windows.size());

  const auto evaluate = [&](std::size_t k) {
    const std::size_t wi = k / nd;
    const double delta = deltas[k % nd];
    const std::size_t window = windows[wi];
    Slot& slot = slots[k];
    const MlvpConfig config{delta, window, options.mode};
    const auto periods = periods_from_deviations(devs[wi], usable_start(series, window), config);
    const auto lengths = periods.lengths(options.censoring);
    if (lengths.size() < options.min_periods) {
      slot.dropped = {delta, window,
                      "only " + std::to_string(lengths.size()) + " periods (need " +
                          std::to_string(options.min_periods) + ")"};
      return;
    }
    try {
      const auto fit = fit_scaling(survival_curve(lengths));
      slot.kept = true;
      slot.cell.delta = delta;
      slot.cell.window = window;
      slot.cell.u = std::log(delta) / std::log(static_cast<double>(window) * series.sample_interval);
      slot.cell.fit = fit;
      slot.cell.period_count = lengths.size();
      slot.cell.power_law = options.gate.accepts(fit);
    } catch (const Error& e) {
      slot.dropped = {delta, window, e.what()};
    }
  };

  for (std::size_t wi = 0; wi < windows.size(); ++wi) {
    devs[wi] = deviations(series, windows[wi], options.mode);
  }
  const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(slots.size())));
  if (workers == 1) {
    for (std::size_t k = 0; k < slots.size(); ++k) evaluate(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k; (k = next.fetch_add(1)) < slots.size();) evaluate(k);
      });
    }
    for (auto& th : pool) th.join();
  }

  CollapseResult result;
  for (auto& s : slots) {
    if (s.kept) {
      result.cells.push_back(s.cell);
      if (s.cell.power_law) ++result.power_law_cells;
    } else {
      result.dropped.push_back(s.dropped);
    }
  }
  if (result.cells.size() < 3) {
    fail(ErrorCode::insufficient_data, "grid too small: only " + std::to_string(result.cells.size()) +
                                           " cells have enough periods");
  }

  std::vector<std::size_t> order(result.cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return result.cells[a].u < result.cells[b].u; });
  std::vector<double> alpha, neg;
  for (auto i : order) {
    result.sorted_u.push_back(result.cells[i].u);
    alpha.push_back(result.cells[i].fit.alpha);
    neg.push_back(-result.cells[i].fit.alpha);
  }
  auto up = isotonic_increasing(alpha);
  auto down = isotonic_increasing(neg);
  for (auto& v : down) v = -v;
  const double ss_up = residual_ss(alpha, up);
  const double ss_down = residual_ss(alpha, down);
  result.increasing = ss_up <= ss_down;
  result.monotone_alpha = result.increasing ? up : down;
  const double total = variance(alpha) * static_cast<double>(alpha.size());
  const double resid = std::min(ss_up, ss_down);
  result.quality = total > 0.0 ? 1.0 - resid / total : 1.0;
  return result;
}

std::vector<double> default_deltas(const TimeSeries& series, std::span<const std::size_t> windows,
                                   Mode mode, std::size_t count) {
  require(!windows.empty(), "need at least one window");
  require(count >= 2, "need at least 2 thresholds");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (auto w : windows) {
    const auto dev = deviations(series, w, mode);
    std::vector<double> usable(dev.begin() + static_cast<std::ptrdiff_t>(usable_start(series, w)),
                               dev.end());
    std::sort(usable.begin(), usable.end());
    lo = std::min(lo, sorted_quantile(usable, 0.1));
    hi = std::max(hi, sorted_quantile(usable, 0.9));
  }
  if (!(lo > 0.0) || !(hi > lo)) {
    fail(ErrorCode::degenerate_input, "deviations have no spread to place thresholds in");
  }
  return log_space(lo, hi, count);
}

HazardCurve hazard_from_periods(std::span<const Period> periods, const HazardOptions& options) {
  if (periods.empty()) fail(ErrorCode::insufficient_data, "no periods for the hazard estimate");
  std::size_t max_len = 0;
  for (const auto& p : periods) max_len = std::max(max_len, p.length);

  // events[l]: periods ending at exactly l; reach[l]: periods lasting >= l
  std::vector<double> events(max_len + 2, 0.0), reach(max_len + 2, 0.0);
  for (const auto& p : periods) {
    reach[p.length] += 1.0;
    if (!p.censored) events[p.length] += 1.0;
  }
  for (std::size_t l = max_len; l >= 1; --l) reach[l - 1] += reach[l];

  HazardCurve curve;
  for (std::size_t l = 1; l <= max_len; ++l) {
    curve.raw_ell.push_back(static_cast<double>(l));
    curve.raw_events.push_back(events[l]);
    curve.raw_at_risk.push_back(reach[l]);
    curve.raw_hazard.push_back(reach[l] > 0.0 ? events[l] / reach[l]
                                              : std::numeric_limits<double>::quiet_NaN());
  }

  const std::size_t ell_min = std::max<std::size_t>(1, options.ell_min);
  if (ell_min > max_len) fail(ErrorCode::insufficient_data, "all periods are shorter than ell_min");
  const double decades = std::log10(static_cast<double>(max_len + 1) / static_cast<double>(ell_min));
  const auto n_edges = static_cast<std::size_t>(std::max(2.0, std::ceil(decades * options.bins_per_decade) + 1.0));
  std::vector<std::size_t> edges;
  for (double e : log_space(static_cast<double>(ell_min), static_cast<double>(max_len + 1), n_edges)) {
    const auto v = static_cast<std::size_t>(std::llround(e));
    if (edges.empty() || v > edges.back()) edges.push_back(v);
  }
  if (edges.size() < 2) edges = {ell_min, max_len + 1};

  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    const std::size_t lo = edges[b];
    const std::size_t hi = edges[b + 1];
    if (reach[lo] < options.min_at_risk) {
      if (curve.bins.empty()) {
        fail(ErrorCode::insufficient_data, "fewer than " + std::to_string(options.min_at_risk) +
                                               " periods reach length " + std::to_string(lo));
      }
      auto& last = curve.bins.back();
      last.ell_hi = hi;
      ++curve.merged_bins;
      continue;
    }
    curve.bins.push_back({lo, hi, 0.0, 0.0, 0.0, 0.0});
  }
  std::vector<double> x, y;
  for (auto& bin : curve.bins) {
    for (std::size_t l = bin.ell_lo; l < bin.ell_hi; ++l) {
      bin.events += events[l];
      bin.at_risk += reach[l];
    }
    bin.ell_center = std::sqrt(static_cast<double>(bin.ell_lo) * static_cast<double>(bin.ell_hi - 1));
    bin.hazard = bin.at_risk > 0.0 ? bin.events / bin.at_risk : 0.0;
    if (bin.events > 0.0) {
      x.push_back(std::log(bin.ell_center));
      y.push_back(std::log(bin.hazard));
    } else {
      ++curve.empty_bins;
    }
  }
  if (x.size() < 3) {
    fail(ErrorCode::insufficient_data,
         "hazard slope needs at least 3 populated bins, got " + std::to_string(x.size()));
  }
  const auto line = fit_line(x, y);
  curve.slope = line.slope;
  curve.slope_stderr = line.slope_stderr;
  curve.r_squared = line.r_squared;
  return curve;
}

HazardCurve silence_breaking_hazard(const TimeSeries& series, const MlvpConfig& config,
                                    HazardOptions options) {
  const auto periods = extract_periods(series, config);
  if (options.ell_min == 0) options.ell_min = config.window;
  return hazard_from_periods(periods.periods, options);
}

LowVarPeriods multivariate_periods(const TimeSeries& price, const TimeSeries& volume,
                                   const MlvpConfig& price_config, const MlvpConfig& volume_config,
                                   Combine combine) {
  price_config.validate();
  volume_config.validate();
  if (price.size() != volume.size()) {
    fail(ErrorCode::invalid_argument, "price and volume channels differ in length (" +
                                          std::to_string(price.size()) + " vs " +
                                          std::to_string(volume.size()) + ")");
  }
  const auto dp = deviations(price, price_config.window, price_config.mode);
  const auto dv = deviations(volume, volume_config.window, volume_config.mode);
  const std::size_t begin =
      std::max(usable_start(price, price_config.window), usable_start(volume, volume_config.window));
  std::vector<char> quiet(price.size(), 0);
  for (std::size_t i = begin; i < quiet.size(); ++i) {
    const bool qp = dp[i] <= price_config.delta;
    const bool qv = dv[i] <= volume_config.delta;
    quiet[i] = combine == Combine::both_quiet ? (qp && qv) : (qp || qv);
  }
  LowVarPeriods out;
  out.periods = runs(quiet, begin);
  out.series_length = price.size();
  out.usable_start = begin;
  out.config = price_config;
  return out;
}

LowVarPeriods multivariate_periods(const TimeSeries& price, const MlvpConfig& price_config,
                                   const MlvpConfig& volume_config, Combine combine) {
  if (!price.volume) fail(ErrorCode::invalid_argument, "series has no volume channel");
  TimeSeries volume;
  volume.values = *price.volume;
  volume.sample_interval = price.sample_interval;
  volume.first_usable = price.first_usable;
  return multivariate_periods(price, volume, price_config, volume_config, combine);
}

}  // namespace econoscale::mlvp
