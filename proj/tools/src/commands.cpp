#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "econoscale/error.hpp"
#include "econoscale/kwem.hpp"
#include "econoscale/mlvp.hpp"
#include "econoscale/portfolio.hpp"
#include "econoscale/regression.hpp"
#include "econoscale/rng.hpp"
#include "econoscale/scaling.hpp"
#include "econoscale/series.hpp"
#include "econoscale/snapshot_io.hpp"
#include "econoscale/text.hpp"
#include "econoscale/wealth_stats.hpp"

namespace econoscale::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t default_seed = 1;
constexpr std::uint64_t max_replicas = 10000;
constexpr std::size_t max_snapshots = 10000;

const char* tool_version() { return ECONOSCALE_VERSION; }

std::string num(double v) { return format_number(v); }

json error_json(const Error& e) {
  return {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
}

// ---------------------------------------------------------------- inputs

class Inputs {
 public:
  fs::path add(const std::string& path) {
    std::lock_guard lock(mutex_);
    if (!seen_.count(path)) {
      if (!fs::exists(path)) fail(ErrorCode::io_error, "input " + path + " does not exist");
      seen_[path] = sha256_file(path);
    }
    return path;
  }

  std::vector<InputRecord> records() const {
    std::vector<InputRecord> out;
    for (const auto& [path, digest] : seen_) out.push_back({path, digest});
    return out;
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::string> seen_;
};

std::string absolute_path(const std::string& p) {
  return fs::absolute(fs::path(p)).lexically_normal().string();
}

// Input path fields of each command, made absolute during resolution.
std::vector<std::string> input_fields(const std::string& command) {
  if (command == "analyze-wealth") return {"input"};
  if (command == "mlvp") return {"input", "volume.input"};
  if (command == "collapse" || command == "hurst") return {"input"};
  if (command == "portfolio") return {"input", "input_a", "input_b"};
  return {};
}

std::string seed_field(const std::string& command) {
  if (command == "simulate") return "run.seed";
  if (command == "generate") return "seed";
  return "";
}

// ---------------------------------------------------------------- series input

series::TimeSeries transformed(series::TimeSeries s, const std::string& transform) {
  if (transform == "none") return s;
  if (transform == "cumsum") {
    series::TimeSeries out;
    out.sample_interval = s.sample_interval;
    out.values.assign(1, 0.0);
    for (std::size_t i = s.first_usable; i < s.size(); ++i) out.values.push_back(out.values.back() + s.values[i]);
    return out;
  }
  for (std::size_t i = s.first_usable; i < s.size(); ++i) {
    if (!(s.values[i] > 0.0)) {
      fail(ErrorCode::invalid_argument,
           "transform '" + transform + "' needs positive values, got " + num(s.values[i]) +
               " at index " + std::to_string(i));
    }
    s.values[i] = std::log(s.values[i]);
  }
  if (transform == "log") return s;
  // log_return
  series::TimeSeries out;
  out.sample_interval = s.sample_interval;
  for (std::size_t i = s.first_usable + 1; i < s.size(); ++i) out.values.push_back(s.values[i] - s.values[i - 1]);
  if (s.volume) out.volume.emplace(s.volume->begin() + static_cast<std::ptrdiff_t>(s.first_usable + 1), s.volume->end());
  return out;
}

const std::vector<std::string> transforms = {"none", "log", "log_return", "cumsum"};

series::TimeSeries load_series(const std::string& path, const std::string& transform, Inputs& inputs) {
  return transformed(series::load_csv(inputs.add(path)), transform);
}

std::string series_csv(const series::TimeSeries& s) {
  std::ostringstream os;
  series::write_csv(os, s);
  return os.str();
}

// ---------------------------------------------------------------- defaults

json simulate_defaults() {
  return {
      {"population",
       {{"n_agents", 1000},
        {"initial_wealth", 1.0},
        {"savings", {{"kind", "uniform"}, {"lambda", nullptr}, {"lambda_max", nullptr}, {"seed", nullptr}}}}},
      {"rule", {{"kind", "homogeneous"}, {"lambda", 0.0}, {"omega", nullptr}, {"kappa", nullptr}}},
      {"run", {{"n_trades", 100000}, {"seed", nullptr}, {"snapshot_times", json::array()}, {"snapshot_every", 0}}},
  };
}

json analyze_wealth_defaults() {
  return {
      {"input", json::array()},
      {"lambda", nullptr},
      {"histogram", {{"bins", 50}, {"log", false}}},
      {"pareto",
       {{"enabled", true}, {"min_tail", 50}, {"min_decades", 1.5}, {"min_r_squared", 0.98}, {"min_upper_count", 10}}},
      {"relaxation", {{"enabled", false}}},
  };
}

json gate_defaults() { return {{"min_r_squared", 0.85}, {"min_decades", 1.0}}; }

json mlvp_defaults() {
  return {
      {"input", nullptr},
      {"transform", "none"},
      {"delta", nullptr},
      {"window", 16},
      {"mode", "absolute"},
      {"censoring", "exclude"},
      {"fit", {{"n_min", nullptr}, {"n_max", nullptr}}},
      {"gate", gate_defaults()},
      {"hazard", {{"enabled", true}, {"ell_min", 0}, {"bins_per_decade", 8.0}, {"min_at_risk", 20.0}}},
      {"volume",
       {{"enabled", false},
        {"input", nullptr},
        {"delta", nullptr},
        {"window", nullptr},
        {"mode", "absolute"},
        {"combine", "both_quiet"}}},
  };
}

json collapse_defaults() {
  return {
      {"input", nullptr},
      {"transform", "none"},
      {"windows", {4, 8, 16, 32}},
      {"deltas", nullptr},
      {"delta_count", 6},
      {"mode", "absolute"},
      {"censoring", "exclude"},
      {"min_periods", 30},
      {"gate", gate_defaults()},
      {"threads", 1},
      {"quality_threshold", 0.9},
      {"spectrum_p", nullptr},
  };
}

json hurst_defaults() {
  return {{"input", nullptr}, {"transform", "none"}, {"scale_min", 16}, {"scale_max", 0}, {"scales_per_decade", 10.0}};
}

json portfolio_defaults() {
  return {{"input", nullptr}, {"input_a", nullptr}, {"input_b", nullptr}, {"mode", "both"}, {"threshold", 2.0}, {"min_tail", 30}};
}

json generate_defaults() {
  const portfolio::JumpPairSpec j;
  return {
      {"kind", "cascade"},
      {"seed", nullptr},
      {"p", 0.7},
      {"depth", 16},
      {"hurst", 0.7},
      {"length", 65536},
      {"jump",
       {{"length", j.length},
        {"core_vol_a", j.core_vol_a},
        {"core_vol_b", j.core_vol_b},
        {"loading_a", j.loading_a},
        {"loading_b", j.loading_b},
        {"jump_prob", j.jump_prob},
        {"jump_duration", j.jump_duration},
        {"jump_mean", j.jump_mean},
        {"jump_sd", j.jump_sd}}},
  };
}

// ---------------------------------------------------------------- simulate

struct SimulateParams {
  kwem::SimConfig sim;
  std::optional<std::uint64_t> savings_seed;  // fixed across replicas when given
};

SimulateParams parse_simulate(const json& c) {
  SimulateParams p;
  auto& s = p.sim;
  const auto n = get_unsigned(c, "population.n_agents");
  check(n >= 2, "population.n_agents", "must be at least 2, got " + std::to_string(n));
  s.n_agents = static_cast<std::size_t>(n);
  s.initial_wealth = get_number(c, "population.initial_wealth");
  check(s.initial_wealth > 0.0, "population.initial_wealth", "must be positive");

  const auto kind = get_choice(c, "rule.kind", {"homogeneous", "constant", "heterogeneous"});
  if (kind == "homogeneous") {
    if (const auto omega = get_optional_number(c, "rule.omega")) {
      check(*omega > 0.0 && *omega <= 1.0, "rule.omega", "must lie in (0, 1], got " + num(*omega));
      s.rule = kwem::ExchangeRule::homogeneous(*omega);
    } else {
      const double lambda = get_number(c, "rule.lambda");
      check(lambda >= 0.0 && lambda < 1.0, "rule.lambda", "must lie in [0, 1), got " + num(lambda));
      s.rule = kwem::ExchangeRule::homogeneous_saving(lambda);
    }
  } else if (kind == "constant") {
    const auto kappa = get_optional_number(c, "rule.kappa");
    check(kappa.has_value(), "rule.kappa", "is required for the constant rule");
    check(*kappa > 0.0, "rule.kappa", "must be positive, got " + num(*kappa));
    s.rule = kwem::ExchangeRule::constant_amount(*kappa);
  } else {
    s.rule = kwem::ExchangeRule::heterogeneous();
    const auto skind = get_choice(c, "population.savings.kind", {"uniform", "sampled"});
    if (skind == "uniform") {
      const auto lambda = get_optional_number(c, "population.savings.lambda");
      check(lambda.has_value(), "population.savings.lambda",
            "is required for uniform savings (population.savings.kind \"sampled\" uses lambda_max)");
      check(*lambda >= 0.0 && *lambda < 1.0, "population.savings.lambda",
            "must lie in [0, 1), got " + num(*lambda));
      s.savings = kwem::SavingsSpec::uniform(*lambda);
    } else {
      const auto lmax = get_optional_number(c, "population.savings.lambda_max");
      check(lmax.has_value(), "population.savings.lambda_max", "is required for sampled savings");
      check(*lmax > 0.0 && *lmax <= 1.0, "population.savings.lambda_max",
            "must lie in (0, 1], got " + num(*lmax));
      p.savings_seed = get_optional_unsigned(c, "population.savings.seed");
      s.savings = kwem::SavingsSpec::sampled(*lmax, 0);
    }
  }

  s.n_trades = get_unsigned(c, "run.n_trades");
  auto times = get_unsigned_list(c, "run.snapshot_times");
  const auto every = get_unsigned(c, "run.snapshot_every");
  if (every > 0) {
    check(s.n_trades / every <= max_snapshots, "run.snapshot_every",
          "would produce more than " + std::to_string(max_snapshots) + " snapshots");
    for (std::uint64_t t = every; t < s.n_trades; t += every) times.push_back(t);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  check(times.size() <= max_snapshots, "run.snapshot_times",
        "lists more than " + std::to_string(max_snapshots) + " snapshots");
  check(times.empty() || times.back() <= s.n_trades, "run.snapshot_times",
        "must not exceed run.n_trades (" + std::to_string(s.n_trades) + ")");
  s.snapshot_times = times;
  return p;
}

json snapshot_stats(const kwem::PopulationSnapshot& snap) {
  const auto w = wealth::WealthSnapshot::from_population(snap);
  return {{"trade_count", snap.trade_count}, {"gini", wealth::gini(w)}, {"max_wealth", wealth::wealth_cutoff(w)}};
}

json run_simulate(const SimulateParams& params, std::uint64_t seed, OutputSet& out) {
  auto cfg = params.sim;
  cfg.seed = seed;
  std::uint64_t savings_seed = 0;
  if (cfg.savings && cfg.savings->kind == kwem::SavingsSpec::Kind::sampled_uniform) {
    savings_seed = params.savings_seed.value_or(derive_seed(seed, 1));
    cfg.savings->seed = savings_seed;
  }
  const auto result = kwem::run_simulation(cfg);

  auto write_snap = [&](const std::string& name, const kwem::PopulationSnapshot& snap) {
    std::ostringstream os;
    kwem::write_snapshot_csv(os, snap);
    out.write(name, os.str());
  };
  json snaps = json::array();
  for (const auto& snap : result.snapshots) {
    const auto name = "snapshot_" + std::to_string(snap.trade_count) + ".csv";
    write_snap(name, snap);
    auto st = snapshot_stats(snap);
    st["file"] = name;
    snaps.push_back(st);
  }
  const kwem::PopulationSnapshot final_snap{result.executed_trades, result.final_population.wealths,
                                            result.final_population.savings};
  write_snap("final.csv", final_snap);
  const auto st = snapshot_stats(final_snap);
  const auto& pop = result.final_population;
  json summary = {
      {"seed", seed},
      {"n_agents", pop.size()},
      {"n_trades", cfg.n_trades},
      {"executed_trades", result.executed_trades},
      {"rejected_trades", result.rejected_trades},
      {"total_wealth", pop.total_wealth},
      {"conservation_error", std::abs(pop.current_sum() - pop.total_wealth)},
      {"mean_wealth", pop.mean_wealth()},
      {"gini", st["gini"]},
      {"max_wealth", st["max_wealth"]},
      {"snapshots", snaps},
  };
  if (cfg.savings && cfg.savings->kind == kwem::SavingsSpec::Kind::sampled_uniform) {
    summary["savings_seed"] = savings_seed;
  }
  return summary;
}

// ---------------------------------------------------------------- generate

struct GenerateParams {
  std::string kind;
  double p = 0.7;
  int depth = 16;
  double hurst = 0.7;
  std::size_t length = 65536;
  portfolio::JumpPairSpec jump;
};

GenerateParams parse_generate(const json& c) {
  GenerateParams g;
  g.kind = get_choice(c, "kind", {"cascade", "fgn", "white", "spectrum", "jump-pair"});
  g.p = get_number(c, "p");
  check(g.p > 0.0 && g.p < 1.0, "p", "must lie in (0, 1), got " + num(g.p));
  const auto depth = get_unsigned(c, "depth");
  check(depth >= 1 && depth <= 26, "depth", "must lie in [1, 26], got " + std::to_string(depth));
  g.depth = static_cast<int>(depth);
  g.hurst = get_number(c, "hurst");
  check(g.hurst > 0.0 && g.hurst < 1.0, "hurst", "must lie in (0, 1), got " + num(g.hurst));
  const auto length = get_unsigned(c, "length");
  check(length >= 2 && length <= (1ULL << 26), "length", "must lie in [2, 2^26]");
  g.length = static_cast<std::size_t>(length);
  auto& j = g.jump;
  j.length = static_cast<std::size_t>(get_unsigned(c, "jump.length"));
  j.core_vol_a = get_number(c, "jump.core_vol_a");
  j.core_vol_b = get_number(c, "jump.core_vol_b");
  j.loading_a = get_number(c, "jump.loading_a");
  j.loading_b = get_number(c, "jump.loading_b");
  j.jump_prob = get_number(c, "jump.jump_prob");
  j.jump_duration = static_cast<std::size_t>(get_unsigned(c, "jump.jump_duration"));
  j.jump_mean = get_number(c, "jump.jump_mean");
  j.jump_sd = get_number(c, "jump.jump_sd");
  if (g.kind == "jump-pair") {
    check(j.length >= 100, "jump.length", "must be at least 100");
    check(j.core_vol_a >= 0.0, "jump.core_vol_a", "must be non-negative");
    check(j.core_vol_b >= 0.0, "jump.core_vol_b", "must be non-negative");
    check(j.jump_prob > 0.0 && j.jump_prob < 1.0, "jump.jump_prob", "must lie in (0, 1)");
    check(j.jump_duration >= 1, "jump.jump_duration", "must be at least 1");
    check(j.jump_sd >= 0.0, "jump.jump_sd", "must be non-negative");
  }
  return g;
}

json run_generate(const GenerateParams& g, std::uint64_t seed, OutputSet& out) {
  json summary = {{"kind", g.kind}};
  if (g.kind == "spectrum") {
    const auto curve = scaling::cascade_spectrum(g.p);
    std::ostringstream os;
    os << "q,h,f\n";
    for (std::size_t i = 0; i < curve.h_values.size(); ++i) {
      const double q = curve.q_values[i];
      os << (std::isnan(q) ? std::string() : num(q)) << ',' << num(curve.h_values[i]) << ','
         << num(curve.f_values[i]) << '\n';
    }
    out.write("spectrum.csv", os.str());
    summary.update({{"p", g.p}, {"h_min", curve.h_min()}, {"h_max", curve.h_max()}, {"points", curve.h_values.size()}});
    return summary;
  }
  summary["seed"] = seed;
  if (g.kind == "jump-pair") {
    const auto pair = portfolio::generate_common_jump_pair(g.jump, seed);
    std::ostringstream os;
    portfolio::write_pair_csv(os, pair);
    out.write("pair.csv", os.str());
    summary.update({{"samples", pair.size()},
                    {"crash_fraction", g.jump.crash_fraction()},
                    {"std_a", std::sqrt(variance(pair.a))},
                    {"std_b", std::sqrt(variance(pair.b))}});
    return summary;
  }
  series::TimeSeries s;
  if (g.kind == "cascade") {
    s = series::generate_binomial_cascade({g.p, g.depth, seed});
    summary.update({{"p", g.p}, {"depth", g.depth}});
  } else if (g.kind == "fgn") {
    s = series::generate_fgn_path(g.hurst, g.length, seed);
    summary["hurst"] = g.hurst;
  } else {
    s = series::generate_white_noise(g.length, seed);
  }
  out.write("series.csv", series_csv(s));
  summary.update({{"samples", s.size()}, {"sample_interval", s.sample_interval}});
  return summary;
}

// ---------------------------------------------------------------- analyze-wealth

json gamma_json(const wealth::GammaFit& f) {
  return {{"shape_n", f.shape_n},
          {"shape_stderr", f.shape_stderr},
          {"scale", f.scale},
          {"ks_stat", f.ks_stat},
          {"sample_size", f.sample_size},
          {"method", f.method}};
}

void run_analyze_wealth(const json& c, Inputs& inputs, OutputSet& out) {
  const auto paths = at_path(c, "input");
  check(paths.is_array() && !paths.empty(), "input", "must list at least one snapshot CSV");
  std::vector<std::string> files;
  for (const auto& p : paths) {
    check(p.is_string(), "input", "must list file paths");
    files.push_back(p.get<std::string>());
  }
  const auto lambda_cfg = get_optional_number(c, "lambda");
  if (lambda_cfg) check(*lambda_cfg >= 0.0 && *lambda_cfg < 1.0, "lambda", "must lie in [0, 1)");
  const auto bins = get_unsigned(c, "histogram.bins");
  check(bins >= 1 && bins <= 100000, "histogram.bins", "must lie in [1, 100000]");
  const bool log_bins = get_bool(c, "histogram.log");
  const bool do_pareto = get_bool(c, "pareto.enabled");
  wealth::ParetoOptions po;
  po.min_tail = static_cast<std::size_t>(get_unsigned(c, "pareto.min_tail"));
  po.min_decades = get_number(c, "pareto.min_decades");
  po.min_r_squared = get_number(c, "pareto.min_r_squared");
  po.min_upper_count = static_cast<std::size_t>(get_unsigned(c, "pareto.min_upper_count"));
  const bool do_relax = get_bool(c, "relaxation.enabled");

  std::vector<kwem::PopulationSnapshot> snaps;
  for (const auto& f : files) snaps.push_back(kwem::read_snapshot_csv(inputs.add(f)));
  const auto pooled = wealth::WealthSnapshot::pooled(snaps);

  // a common saving parameter, when every agent of every snapshot shares it
  std::optional<double> lambda = lambda_cfg;
  if (!lambda && !snaps.front().savings.empty()) {
    const double l0 = snaps.front().savings.front();
    bool common = true;
    for (const auto& s : snaps) {
      for (double l : s.savings) common = common && l == l0;
    }
    if (common) lambda = l0;
  }

  json result = {
      {"snapshots", files.size()},
      {"sample_size", pooled.size()},
      {"mean_wealth", pooled.mean_wealth},
      {"gini", wealth::gini(pooled)},
      {"max_wealth", wealth::wealth_cutoff(pooled)},
  };
  const auto gamma = wealth::fit_gamma(pooled);
  result["gamma"] = gamma_json(gamma);
  if (lambda) {
    result["lambda"] = *lambda;
    result["theory"] = {{"shape_n", wealth::effective_shape(*lambda)}};
  }

  if (do_pareto) {
    try {
      const auto t = wealth::fit_pareto_tail(pooled, po);
      result["pareto"] = {{"exponent", t.exponent},   {"exponent_stderr", t.exponent_stderr},
                          {"x_min", t.x_min},         {"x_upper", t.x_upper},
                          {"decades", t.decades},     {"r_squared", t.r_squared},
                          {"ks_stat", t.ks_stat},     {"tail_count", t.tail_count}};
    } catch (const Error& e) {
      result["pareto"] = {{"error", error_json(e)}};
    }
  }

  if (do_relax) {
    try {
      check(lambda.has_value(), "lambda", "is required for the relaxation fit when savings differ");
      std::vector<wealth::WealthSnapshot> traj;
      for (const auto& s : snaps) traj.push_back(wealth::WealthSnapshot::from_population(s));
      std::stable_sort(traj.begin(), traj.end(),
                       [](const auto& a, const auto& b) { return a.trade_count < b.trade_count; });
      const auto r = wealth::measure_relaxation(traj, *lambda);
      result["relaxation"] = {{"tau", r.tau_relax}, {"fit_r_squared", r.fit_r2},
                              {"plateau_std", r.plateau_std}, {"snapshots", traj.size()},
                              {"units", "trades per agent"}};
    } catch (const Error& e) {
      result["relaxation"] = {{"error", error_json(e)}};
    }
  }

  const auto h = wealth::histogram(pooled, static_cast<std::size_t>(bins), log_bins);
  std::ostringstream os;
  os << "lo,hi,count,density,gamma_density\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double mid = log_bins ? std::sqrt(std::max(h.edges[i], 0.0) * h.edges[i + 1])
                                : 0.5 * (h.edges[i] + h.edges[i + 1]);
    os << num(h.edges[i]) << ',' << num(h.edges[i + 1]) << ',' << num(h.counts[i]) << ','
       << num(h.density[i]) << ',' << num(wealth::equilibrium_pdf(mid, gamma.shape_n, pooled.mean_wealth))
       << '\n';
  }
  out.write("histogram.csv", os.str());
  out.write_json("wealth.json", result);
}

// ---------------------------------------------------------------- mlvp

mlvp::Mode parse_mode(const json& c, std::string_view field) {
  return get_choice(c, field, {"absolute", "relative"}) == "absolute" ? mlvp::Mode::absolute
                                                                     : mlvp::Mode::relative;
}

mlvp::Censoring parse_censoring(const json& c, std::string_view field) {
  return get_choice(c, field, {"exclude", "include"}) == "exclude" ? mlvp::Censoring::exclude
                                                                  : mlvp::Censoring::include;
}

mlvp::ScalingGate parse_gate(const json& c) {
  mlvp::ScalingGate g;
  g.min_r_squared = get_number(c, "gate.min_r_squared");
  g.min_decades = get_number(c, "gate.min_decades");
  return g;
}

std::size_t parse_window(const json& c, std::string_view field) {
  const auto w = get_unsigned(c, field);
  check(w >= 1, field, "must be at least 1");
  return static_cast<std::size_t>(w);
}

double parse_delta(const json& c, std::string_view field) {
  const auto d = get_optional_number(c, field);
  check(d.has_value(), field, "is required");
  check(*d > 0.0, field, "must be positive, got " + num(*d));
  return *d;
}

json fit_json(const mlvp::ScalingFit& f, const mlvp::ScalingGate& gate) {
  return {{"alpha", f.alpha},
          {"r0", f.r0},
          {"n_min", f.n_min},
          {"n_max", f.n_max},
          {"decades", std::log10(f.n_max / f.n_min)},
          {"r_squared", f.r_squared},
          {"exp_r_squared", f.exp_r_squared},
          {"points", f.points},
          {"automatic_range", f.automatic_range},
          {"power_law", gate.accepts(f)}};
}

void run_mlvp(const json& c, Inputs& inputs, OutputSet& out) {
  const auto input = get_optional_string(c, "input");
  check(input.has_value(), "input", "is required");
  const auto transform = get_choice(c, "transform", transforms);
  mlvp::MlvpConfig cfg{parse_delta(c, "delta"), parse_window(c, "window"), parse_mode(c, "mode")};
  const auto censoring = parse_censoring(c, "censoring");
  const auto gate = parse_gate(c);
  const auto n_min = get_optional_number(c, "fit.n_min");
  const auto n_max = get_optional_number(c, "fit.n_max");
  check(n_min.has_value() == n_max.has_value(), "fit", "needs both n_min and n_max, or neither");
  const bool do_hazard = get_bool(c, "hazard.enabled");
  mlvp::HazardOptions ho;
  ho.ell_min = static_cast<std::size_t>(get_unsigned(c, "hazard.ell_min"));
  ho.bins_per_decade = get_number(c, "hazard.bins_per_decade");
  ho.min_at_risk = get_number(c, "hazard.min_at_risk");
  check(ho.bins_per_decade > 0.0, "hazard.bins_per_decade", "must be positive");
  const bool multi = get_bool(c, "volume.enabled");

  const auto s = load_series(*input, transform, inputs);
  mlvp::LowVarPeriods periods;
  json channels;
  if (multi) {
    const mlvp::MlvpConfig vcfg{parse_delta(c, "volume.delta"),
                                get_optional_unsigned(c, "volume.window") ? parse_window(c, "volume.window")
                                                                          : cfg.window,
                                parse_mode(c, "volume.mode")};
    const auto combine = get_choice(c, "volume.combine", {"both_quiet", "either_quiet"}) == "both_quiet"
                             ? mlvp::Combine::both_quiet
                             : mlvp::Combine::either_quiet;
    if (const auto vin = get_optional_string(c, "volume.input")) {
      const auto v = load_series(*vin, "none", inputs);
      periods = mlvp::multivariate_periods(s, v, cfg, vcfg, combine);
    } else {
      periods = mlvp::multivariate_periods(s, cfg, vcfg, combine);
    }
    channels = {{"delta", vcfg.delta}, {"window", vcfg.window},
                {"combine", combine == mlvp::Combine::both_quiet ? "both_quiet" : "either_quiet"}};
  } else {
    periods = mlvp::extract_periods(s, cfg);
  }

  {
    std::ostringstream os;
    os << "start,length,censored\n";
    for (const auto& p : periods.periods) os << p.start << ',' << p.length << ',' << (p.censored ? 1 : 0) << '\n';
    out.write("periods.csv", os.str());
  }
  const auto curve = mlvp::survival_curve(periods, censoring);
  {
    std::ostringstream os;
    os << "n,count\n";
    for (std::size_t i = 0; i < curve.size(); ++i) os << num(curve.n_values[i]) << ',' << num(curve.counts[i]) << '\n';
    out.write("survival.csv", os.str());
  }

  const auto lengths = periods.lengths(censoring);
  json result = {
      {"series_length", periods.series_length},
      {"usable_start", periods.usable_start},
      {"period_count", periods.periods.size()},
      {"uncensored_count", periods.uncensored_count()},
      {"fitted_count", lengths.size()},
      {"quiet_samples", std::accumulate(lengths.begin(), lengths.end(), std::size_t{0})},
      {"max_length", lengths.empty() ? 0 : *std::max_element(lengths.begin(), lengths.end())},
  };
  if (multi) result["volume"] = channels;

  try {
    const auto fit = n_min ? mlvp::fit_scaling(curve, *n_min, *n_max) : mlvp::fit_scaling(curve);
    result["scaling"] = fit_json(fit, gate);
  } catch (const Error& e) {
    result["scaling"] = {{"error", error_json(e)}};
  }

  if (do_hazard) {
    if (ho.ell_min == 0) ho.ell_min = cfg.window;
    std::ostringstream os;
    os << "ell_lo,ell_hi,ell_center,events,at_risk,hazard\n";
    try {
      const auto hz = mlvp::hazard_from_periods(periods.periods, ho);
      for (const auto& b : hz.bins) {
        os << b.ell_lo << ',' << b.ell_hi << ',' << num(b.ell_center) << ',' << num(b.events) << ','
           << num(b.at_risk) << ',' << num(b.hazard) << '\n';
      }
      result["hazard"] = {{"slope", hz.slope},
                          {"slope_stderr", hz.slope_stderr},
                          {"r_squared", hz.r_squared},
                          {"ell_min", ho.ell_min},
                          {"bins", hz.bins.size()},
                          {"merged_bins", hz.merged_bins},
                          {"empty_bins", hz.empty_bins}};
    } catch (const Error& e) {
      result["hazard"] = {{"error", error_json(e)}};
    }
    out.write("hazard.csv", os.str());
  }
  out.write_json("mlvp.json", result);
}

// ---------------------------------------------------------------- collapse

void run_collapse(const json& c, Inputs& inputs, OutputSet& out) {
  const auto input = get_optional_string(c, "input");
  check(input.has_value(), "input", "is required");
  const auto transform = get_choice(c, "transform", transforms);
  std::vector<std::size_t> windows;
  for (auto w : get_unsigned_list(c, "windows")) {
    check(w >= 1, "windows", "must be at least 1 sample each");
    windows.push_back(static_cast<std::size_t>(w));
  }
  auto deltas = get_number_list(c, "deltas");
  for (double d : deltas) check(d > 0.0, "deltas", "must be positive");
  const auto delta_count = get_unsigned(c, "delta_count");
  mlvp::CollapseOptions opts;
  opts.mode = parse_mode(c, "mode");
  opts.censoring = parse_censoring(c, "censoring");
  opts.min_periods = static_cast<std::size_t>(get_unsigned(c, "min_periods"));
  opts.gate = parse_gate(c);
  const auto threads = get_unsigned(c, "threads");
  check(threads >= 1 && threads <= 256, "threads", "must lie in [1, 256]");
  opts.threads = static_cast<unsigned>(threads);
  const double quality_threshold = get_number(c, "quality_threshold");
  const auto spectrum_p = get_optional_number(c, "spectrum_p");
  if (spectrum_p) check(*spectrum_p > 0.0 && *spectrum_p < 1.0, "spectrum_p", "must lie in (0, 1)");

  const auto s = load_series(*input, transform, inputs);
  const std::size_t nd = deltas.empty() ? delta_count : deltas.size();
  if (windows.size() < 3 || nd < 3) {
    fail(ErrorCode::insufficient_data, "grid too small: need at least 3 windows and 3 deltas, got " +
                                           std::to_string(windows.size()) + "x" + std::to_string(nd));
  }
  const bool auto_deltas = deltas.empty();
  if (auto_deltas) deltas = mlvp::default_deltas(s, windows, opts.mode, nd);
  const auto r = mlvp::collapse_test(s, deltas, windows, opts);

  // monotone fit value per cell, following the stable sort by u
  std::vector<std::size_t> order(r.cells.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return r.cells[a].u < r.cells[b].u; });
  std::vector<double> monotone(r.cells.size());
  for (std::size_t k = 0; k < order.size(); ++k) monotone[order[k]] = r.monotone_alpha[k];

  std::optional<scaling::SpectrumCurve> spec;
  if (spectrum_p) spec = scaling::cascade_spectrum(*spectrum_p);

  std::ostringstream os;
  os << "delta,window,tau,u,alpha,alpha_monotone,r_squared,exp_r_squared,n_min,n_max,points,period_count,"
        "power_law";
  if (spec) os << ",spectrum_f";
  os << '\n';
  double max_dev = 0.0, max_dev_monotone = 0.0;
  std::size_t shared = 0;
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const auto& cell = r.cells[i];
    os << num(cell.delta) << ',' << cell.window << ',' << num(static_cast<double>(cell.window) * s.sample_interval)
       << ',' << num(cell.u) << ',' << num(cell.fit.alpha) << ',' << num(monotone[i]) << ','
       << num(cell.fit.r_squared) << ',' << num(cell.fit.exp_r_squared) << ',' << num(cell.fit.n_min) << ','
       << num(cell.fit.n_max) << ',' << cell.fit.points << ',' << cell.period_count << ','
       << (cell.power_law ? 1 : 0);
    if (spec) {
      const double f = spec->at(cell.u);
      os << ',' << (std::isnan(f) ? std::string() : num(f));
      if (!std::isnan(f)) {
        ++shared;
        max_dev = std::max(max_dev, std::abs(cell.fit.alpha - f));
        max_dev_monotone = std::max(max_dev_monotone, std::abs(monotone[i] - f));
      }
    }
    os << '\n';
  }
  out.write("collapse.csv", os.str());

  json dropped = json::array();
  for (const auto& d : r.dropped) dropped.push_back({{"delta", d.delta}, {"window", d.window}, {"reason", d.reason}});
  json result = {
      {"series_length", s.size()},
      {"sample_interval", s.sample_interval},
      {"windows", windows},
      {"deltas", deltas},
      {"automatic_deltas", auto_deltas},
      {"cells", r.cells.size()},
      {"power_law_cells", r.power_law_cells},
      {"dropped", dropped},
      {"quality", r.quality},
      {"quality_threshold", quality_threshold},
      {"monotone_direction", r.increasing ? "increasing" : "decreasing"},
      {"collapses", r.collapses(quality_threshold)},
  };
  if (spec) {
    result["spectrum"] = {{"p", *spectrum_p},
                          {"h_min", spec->h_min()},
                          {"h_max", spec->h_max()},
                          {"shared_cells", shared},
                          {"max_abs_deviation", shared ? json(max_dev) : json(nullptr)},
                          {"max_abs_deviation_monotone", shared ? json(max_dev_monotone) : json(nullptr)}};
  }
  out.write_json("collapse.json", result);
}

// ---------------------------------------------------------------- hurst

void run_hurst(const json& c, Inputs& inputs, OutputSet& out) {
  const auto input = get_optional_string(c, "input");
  check(input.has_value(), "input", "is required");
  const auto transform = get_choice(c, "transform", transforms);
  scaling::DfaOptions o;
  o.scale_min = static_cast<std::size_t>(get_unsigned(c, "scale_min"));
  o.scale_max = static_cast<std::size_t>(get_unsigned(c, "scale_max"));
  o.scales_per_decade = get_number(c, "scales_per_decade");
  check(o.scale_min >= 4, "scale_min", "must be at least 4");
  check(o.scale_max == 0 || o.scale_max >= 10 * o.scale_min, "scale_max", "must be 0 or at least 10 * scale_min");
  check(o.scales_per_decade > 0.0, "scales_per_decade", "must be positive");

  const auto s = load_series(*input, transform, inputs);
  const auto est = scaling::hurst_dfa(s, o);
  std::ostringstream os;
  os << "scale,fluctuation,segments\n";
  for (const auto& p : est.points) os << num(p.scale) << ',' << num(p.fluctuation) << ',' << p.segments << '\n';
  out.write("dfa.csv", os.str());
  out.write_json("hurst.json", {{"h", est.h},
                                {"h_stderr", est.stderr_h},
                                {"r_squared", est.r_squared},
                                {"scale_min", est.scale_min},
                                {"scale_max", est.scale_max},
                                {"points", est.points.size()},
                                {"samples", s.usable_size()}});
}

// ---------------------------------------------------------------- portfolio

json portfolio_json(const portfolio::PortfolioResult& r) {
  json j = {{"mode", std::string(portfolio::to_string(r.mode))},
            {"weight_a", r.weight_a},
            {"weight_b", r.weight_b()},
            {"std", r.std},
            {"max_drawdown", r.max_drawdown},
            {"sample_count", r.sample_count},
            {"tail_count", r.tail_count}};
  j["threshold"] = r.mode == portfolio::Mode::tail ? json(r.threshold) : json(nullptr);
  return j;
}

void run_portfolio(const json& c, Inputs& inputs, OutputSet& out) {
  const auto in = get_optional_string(c, "input");
  const auto in_a = get_optional_string(c, "input_a");
  const auto in_b = get_optional_string(c, "input_b");
  check(in.has_value() != (in_a.has_value() || in_b.has_value()), "input",
        "must be given, or else both input_a and input_b");
  check(in.has_value() || (in_a.has_value() && in_b.has_value()), "input_b",
        "is required together with input_a");
  const auto mode = get_choice(c, "mode", {"both", "variance", "tail"});
  const double threshold = get_number(c, "threshold");
  check(threshold > 0.0, "threshold", "must be positive");
  const auto min_tail = static_cast<std::size_t>(get_unsigned(c, "min_tail"));

  portfolio::ReturnPair pair;
  if (in) {
    pair = portfolio::load_pair_csv(inputs.add(*in));
  } else {
    pair.a = series::load_csv(inputs.add(*in_a)).values;
    pair.b = series::load_csv(inputs.add(*in_b)).values;
  }
  pair.validate();

  json result = {{"sample_count", pair.size()}};
  json results = json::object();
  std::optional<portfolio::PortfolioResult> var, tail;
  if (mode != "tail") {
    var = portfolio::optimize_two_asset(pair, portfolio::Mode::variance);
    results["variance"] = portfolio_json(*var);
  }
  if (mode != "variance") {
    const auto split = portfolio::split_returns(pair, threshold, min_tail);
    tail = portfolio::optimize_two_asset(pair, portfolio::Mode::tail, threshold);
    results["tail"] = portfolio_json(*tail);
    results["tail"]["gaussian_count"] = split.gaussian_count;
    results["tail"]["std_a"] = split.std_a;
    results["tail"]["std_b"] = split.std_b;
  }
  result["results"] = results;
  if (var && tail) {
    result["comparison"] = {{"tail_drawdown_not_larger", tail->max_drawdown <= var->max_drawdown},
                            {"tail_std_not_smaller", tail->std >= var->std},
                            {"std_ratio", var->std > 0.0 ? json(tail->std / var->std) : json(nullptr)},
                            {"drawdown_ratio", var->max_drawdown > 0.0 ? json(tail->max_drawdown / var->max_drawdown)
                                                                       : json(nullptr)}};
  }
  out.write_json("portfolio.json", result);
}

// ---------------------------------------------------------------- replicas

// Mean, population standard deviation, min and max of every top-level number
// shared by all replica summaries, in replica order.
json aggregate(const std::vector<json>& summaries) {
  json agg = json::object();
  for (const auto& [key, value] : summaries.front().items()) {
    if (!value.is_number() || key == "seed" || key == "savings_seed" || key == "replica") continue;
    std::vector<double> v;
    for (const auto& s : summaries) {
      if (s.contains(key) && s.at(key).is_number()) v.push_back(s.at(key).get<double>());
    }
    if (v.size() != summaries.size()) continue;
    agg[key] = {{"mean", mean(v)},
                {"std", std::sqrt(variance(v))},
                {"min", *std::min_element(v.begin(), v.end())},
                {"max", *std::max_element(v.begin(), v.end())}};
  }
  return agg;
}

template <class Params, class Fn>
void run_replicated(const Invocation& inv, const Params& params, Fn fn, OutputSet& out) {
  if (inv.replicas == 1) {
    out.write_json("summary.json", fn(params, inv.seed, out));
    return;
  }
  const auto n = static_cast<std::size_t>(inv.replicas);
  std::vector<json> summaries(n);
  std::vector<OutputSet> sets;
  std::vector<std::uint64_t> seeds(n);
  for (std::size_t r = 0; r < n; ++r) {
    sets.push_back(out.subdir("replica_" + std::to_string(r)));
    seeds[r] = derive_seed(inv.seed, r);
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t r; (r = next.fetch_add(1)) < n;) {
      try {
        summaries[r] = fn(params, seeds[r], sets[r]);
        summaries[r]["replica"] = r;
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const auto workers = std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (auto& s : sets) out.absorb(s);
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  out.write_json("summary.json", {{"replicas", n}, {"base_seed", inv.seed}, {"aggregate", aggregate(summaries)},
                                  {"per_replica", summaries}});
}

void dispatch(const Invocation& inv, Inputs& inputs, OutputSet& out) {
  const auto& c = inv.config;
  const auto& cmd = inv.command;
  if (inv.replicas > 1 && cmd != "simulate" && cmd != "generate") {
    throw ConfigError("--replicas applies only to simulate and generate");
  }
  if (cmd == "simulate") {
    run_replicated(inv, parse_simulate(c), run_simulate, out);
  } else if (cmd == "generate") {
    run_replicated(inv, parse_generate(c), run_generate, out);
  } else if (cmd == "analyze-wealth") {
    run_analyze_wealth(c, inputs, out);
  } else if (cmd == "mlvp") {
    run_mlvp(c, inputs, out);
  } else if (cmd == "collapse") {
    run_collapse(c, inputs, out);
  } else if (cmd == "hurst") {
    run_hurst(c, inputs, out);
  } else if (cmd == "portfolio") {
    run_portfolio(c, inputs, out);
  } else {
    throw ConfigError("unknown command '" + cmd + "'");
  }
}

// ---------------------------------------------------------------- errors

struct Failure {
  std::string code;
  std::string message;
  int exit_code = 1;
};

Failure classify(std::exception_ptr ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const ConfigError& e) {
    return {"config_error", e.what(), 2};
  } catch (const Error& e) {
    return {std::string(to_string(e.code())), e.what(), e.code() == ErrorCode::invalid_argument ? 2 : 1};
  } catch (const std::exception& e) {
    return {"runtime_error", e.what(), 1};
  } catch (...) {
    return {"runtime_error", "unknown failure", 1};
  }
}

json failure_json(const std::string& command, const Failure& f) {
  return {{"command", command}, {"error", {{"code", f.code}, {"message", f.message}}}, {"exit_code", f.exit_code}};
}

// Best effort: the failure is also on stderr.
void write_error_file(const fs::path& out_dir, const json& record) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  std::ofstream f(out_dir / "error.json", std::ios::binary | std::ios::trunc);
  f << pretty(record);
}

void write_manifest(const Invocation& inv, const Inputs& inputs, const OutputSet& outputs) {
  Manifest m;
  m.command = inv.command;
  m.config = inv.config;
  m.seed = inv.seed;
  m.seed_source = inv.seed_source;
  m.replicas = inv.replicas;
  m.tool_version = tool_version();
  m.inputs = inputs.records();
  m.outputs = outputs.sorted_files();
  OutputSet(inv.out).write(std::string(manifest_name), pretty(m.to_json()));
}

// ---------------------------------------------------------------- resolution

std::uint64_t parse_seed(const std::string& text, const std::string& what) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(what + " must be a non-negative 64-bit integer, got '" + text + "'");
  }
  return v;
}

json parse_flag_value(const std::string& text, bool as_text) {
  if (as_text) return text;
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

struct Override {
  std::string path;
  json value;
};

Invocation resolve(const std::string& command, const std::optional<fs::path>& config_file,
                   const std::vector<Override>& overrides, const std::optional<std::string>& seed_flag,
                   std::uint64_t replicas, const fs::path& out) {
  Invocation inv;
  inv.command = command;
  inv.out = out;
  inv.replicas = replicas;
  if (replicas < 1 || replicas > max_replicas) {
    throw ConfigError("--replicas must lie in [1, " + std::to_string(max_replicas) + "]");
  }
  json cfg = default_config(command);
  if (config_file) cfg = merge_config(cfg, load_config_file(*config_file));
  for (const auto& o : overrides) {
    json overlay = json::object();
    set_path(overlay, o.path, o.value);
    cfg = merge_config(cfg, overlay);
  }
  for (const auto& field : input_fields(command)) {
    const auto& v = at_path(cfg, field);
    if (v.is_string()) {
      set_path(cfg, field, absolute_path(v.get<std::string>()));
    } else if (v.is_array()) {
      json list = json::array();
      for (const auto& e : v) list.push_back(e.is_string() ? json(absolute_path(e.get<std::string>())) : e);
      set_path(cfg, field, list);
    }
  }

  const auto field = seed_field(command);
  const char* env = std::getenv(seed_env_var);
  if (seed_flag) {
    inv.seed = parse_seed(*seed_flag, "--seed");
    inv.seed_source = "flag";
  } else if (env && *env) {
    inv.seed = parse_seed(env, seed_env_var);
    inv.seed_source = "env";
  } else if (!field.empty() && !at_path(cfg, field).is_null()) {
    inv.seed = get_unsigned(cfg, field);
    inv.seed_source = "config";
  } else {
    inv.seed = default_seed;
    inv.seed_source = "default";
  }
  if (!field.empty()) set_path(cfg, field, inv.seed);
  inv.config = std::move(cfg);
  return inv;
}

// Convenience flags: each sets one config field.
struct Shortcut {
  std::string flag;
  std::string path;
  enum Kind { text, value, text_list, value_list } kind;
  std::string help;
};

std::vector<Shortcut> shortcuts(const std::string& command) {
  using K = Shortcut::Kind;
  if (command == "simulate") {
    return {{"--agents", "population.n_agents", K::value, "number of agents"},
            {"--trades", "run.n_trades", K::value, "number of trades"},
            {"--rule", "rule.kind", K::text, "homogeneous, constant or heterogeneous"},
            {"--lambda", "rule.lambda", K::value, "common saving parameter"},
            {"--savings", "population.savings.kind", K::text, "uniform or sampled (heterogeneous rule)"},
            {"--lambda-max", "population.savings.lambda_max", K::value, "upper bound of sampled savings"},
            {"--snapshot-every", "run.snapshot_every", K::value, "trades between snapshots"}};
  }
  if (command == "analyze-wealth") {
    return {{"--input", "input", K::text_list, "snapshot CSV files (pooled)"},
            {"--lambda", "lambda", K::value, "saving parameter for the theory comparison"},
            {"--bins", "histogram.bins", K::value, "histogram bins"}};
  }
  if (command == "mlvp") {
    return {{"--input", "input", K::text, "series CSV"},
            {"--delta", "delta", K::value, "quiet threshold"},
            {"--window", "window", K::value, "trailing window in samples"},
            {"--mode", "mode", K::text, "absolute or relative"},
            {"--transform", "transform", K::text, "none, log, log_return or cumsum"}};
  }
  if (command == "collapse") {
    return {{"--input", "input", K::text, "series CSV"},
            {"--windows", "windows", K::value_list, "trailing windows in samples"},
            {"--deltas", "deltas", K::value_list, "quiet thresholds"},
            {"--mode", "mode", K::text, "absolute or relative"},
            {"--spectrum-p", "spectrum_p", K::value, "compare against the cascade spectrum of this p"},
            {"--transform", "transform", K::text, "none, log, log_return or cumsum"}};
  }
  if (command == "hurst") {
    return {{"--input", "input", K::text, "series CSV holding a path"},
            {"--scale-min", "scale_min", K::value, "smallest DFA scale"},
            {"--scale-max", "scale_max", K::value, "largest DFA scale (0: length/4)"},
            {"--transform", "transform", K::text, "none, log, log_return or cumsum"}};
  }
  if (command == "portfolio") {
    return {{"--input", "input", K::text, "CSV with two return columns"},
            {"--input-a", "input_a", K::text, "series CSV of asset a returns"},
            {"--input-b", "input_b", K::text, "series CSV of asset b returns"},
            {"--mode", "mode", K::text, "both, variance or tail"},
            {"--threshold", "threshold", K::value, "tail threshold in standard deviations"}};
  }
  if (command == "generate") {
    return {{"--kind", "kind", K::text, "cascade, fgn, white, spectrum or jump-pair"},
            {"--p", "p", K::value, "cascade multiplier"},
            {"--depth", "depth", K::value, "cascade generations"},
            {"--hurst", "hurst", K::value, "fGn Hurst exponent"},
            {"--length", "length", K::value, "samples (fgn, white)"}};
  }
  return {};
}

struct SubcommandFlags {
  std::string config;
  std::string seed;
  std::string out;
  std::uint64_t replicas = 1;
  std::vector<std::string> sets;
  std::map<std::string, std::string> single;
  std::map<std::string, std::vector<std::string>> lists;
};

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"simulate", "analyze-wealth", "mlvp",    "collapse",
                                                 "hurst",    "portfolio",      "generate"};
  return names;
}

json default_config(const std::string& command) {
  if (command == "simulate") return simulate_defaults();
  if (command == "analyze-wealth") return analyze_wealth_defaults();
  if (command == "mlvp") return mlvp_defaults();
  if (command == "collapse") return collapse_defaults();
  if (command == "hurst") return hurst_defaults();
  if (command == "portfolio") return portfolio_defaults();
  if (command == "generate") return generate_defaults();
  throw ConfigError("unknown command '" + command + "'");
}

int execute(const Invocation& inv, std::ostream& out, std::ostream& err) {
  std::error_code ec;
  fs::remove(inv.out / "error.json", ec);
  fs::remove(inv.out / manifest_name, ec);
  OutputSet outputs(inv.out);
  Inputs inputs;
  try {
    dispatch(inv, inputs, outputs);
  } catch (...) {
    const auto f = classify(std::current_exception());
    const auto record = failure_json(inv.command, f);
    err << record.dump() << '\n';
    if (f.exit_code == 2) {
      write_error_file(inv.out, record);
      return 2;
    }
    try {
      outputs.write_json("error.json", record);
      write_manifest(inv, inputs, outputs);
    } catch (...) {
      write_error_file(inv.out, record);
    }
    return f.exit_code;
  }
  try {
    write_manifest(inv, inputs, outputs);
  } catch (...) {
    const auto f = classify(std::current_exception());
    err << failure_json(inv.command, f).dump() << '\n';
    return 1;
  }
  out << inv.command << ": wrote " << outputs.sorted_files().size() << " files and " << manifest_name << " to "
      << inv.out.string() << '\n';
  return 0;
}

namespace {

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

int replay(const fs::path& manifest_path, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  Invocation inv;
  inv.out = out_dir;
  Manifest m;
  try {
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) throw ConfigError("cannot open manifest " + manifest_path.string());
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("manifest " + manifest_path.string() + " is not valid JSON: " + e.what());
    }
    m = Manifest::from_json(j);
    inv.command = m.command;
    inv.config = merge_config(default_config(m.command), m.config);
    inv.seed = m.seed;
    inv.seed_source = m.seed_source;
    inv.replicas = m.replicas;
    for (const auto& r : m.inputs) {
      if (!fs::exists(r.path)) fail(ErrorCode::io_error, "recorded input " + r.path + " no longer exists");
      if (sha256_file(r.path) != r.sha256) fail(ErrorCode::io_error, "recorded input " + r.path + " has changed");
    }
  } catch (...) {
    auto f = classify(std::current_exception());
    if (f.code == "parse_error") f.exit_code = 2;
    const auto record = failure_json("replay", f);
    err << record.dump() << '\n';
    write_error_file(out_dir, record);
    return f.exit_code;
  }
  if (m.tool_version != tool_version()) {
    err << json({{"warning", "manifest written by version " + m.tool_version + ", replaying with " +
                                 std::string(tool_version())}})
               .dump()
        << '\n';
  }

  const fs::path source = manifest_path.parent_path().empty() ? fs::path(".") : manifest_path.parent_path();
  std::error_code ec;
  if (fs::equivalent(source, out_dir, ec)) {
    return execute(inv, out, err);
  }
  const int rc = execute(inv, out, err);

  std::vector<std::string> compared, differing;
  auto names = m.outputs;
  names.emplace_back(manifest_name);
  for (const auto& name : names) {
    const auto original = source / name;
    if (!fs::exists(original)) continue;
    compared.push_back(name);
    if (read_bytes(original) != read_bytes(out_dir / name)) differing.push_back(name);
  }
  if (!differing.empty()) {
    std::string list;
    for (const auto& d : differing) list += (list.empty() ? "" : ", ") + d;
    const Failure f{"replay_mismatch", "replayed outputs differ from the originals: " + list, 1};
    err << failure_json("replay", f).dump() << '\n';
    return 1;
  }
  out << "replay: " << compared.size() << " files byte-identical to " << source.string() << '\n';
  return rc;
}

int run_main(int argc, char** argv) {
  CLI::App app{"Kinetic wealth-exchange simulation and scaling analysis of quiet periods"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  std::map<std::string, SubcommandFlags> flags;
  std::map<std::string, std::vector<Shortcut>> table;
  for (const auto& name : command_names()) {
    auto& f = flags[name];
    auto* sub = app.add_subcommand(name, "");
    sub->add_option("--config", f.config, "JSON config file");
    sub->add_option("--seed", f.seed, "seed (overrides " + std::string(seed_env_var) + " and the config)");
    sub->add_option("--out", f.out, "output directory")->required();
    sub->add_option("--replicas", f.replicas, "independent replicas (simulate, generate)");
    sub->add_option("--set", f.sets, "override a config field: path.to.field=value")->take_all();
    table[name] = shortcuts(name);
    for (const auto& s : table[name]) {
      if (s.kind == Shortcut::text || s.kind == Shortcut::value) {
        sub->add_option(s.flag, f.single[s.path], s.help);
      } else {
        sub->add_option(s.flag, f.lists[s.path], s.help)->delimiter(',');
      }
    }
  }
  app.get_subcommand("simulate")->description("run a kinetic wealth-exchange simulation");
  app.get_subcommand("analyze-wealth")->description("fit equilibrium and tail laws to wealth snapshots");
  app.get_subcommand("mlvp")->description("extract quiet periods and fit their length distribution");
  app.get_subcommand("collapse")->description("scaling exponents over a threshold/window grid");
  app.get_subcommand("hurst")->description("Hurst exponent by detrended fluctuation analysis");
  app.get_subcommand("portfolio")->description("variance versus tail-risk two-asset weights");
  app.get_subcommand("generate")->description("synthetic benchmark series");

  std::string manifest, replay_out;
  auto* rep = app.add_subcommand("replay", "re-run the invocation recorded in a manifest");
  rep->add_option("--manifest", manifest, "manifest.json of an earlier run")->required();
  rep->add_option("--out", replay_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (rep->parsed()) return replay(manifest, replay_out, std::cout, std::cerr);

  for (const auto& name : command_names()) {
    auto* sub = app.get_subcommand(name);
    if (!sub->parsed()) continue;
    const auto& f = flags[name];
    Invocation inv;
    try {
      std::vector<Override> overrides;
      for (const auto& s : table[name]) {
        if (s.kind == Shortcut::text || s.kind == Shortcut::value) {
          if (sub->count(s.flag) == 0) continue;
          overrides.push_back({s.path, parse_flag_value(f.single.at(s.path), s.kind == Shortcut::text)});
        } else {
          if (sub->count(s.flag) == 0) continue;
          json list = json::array();
          for (const auto& v : f.lists.at(s.path)) list.push_back(parse_flag_value(v, s.kind == Shortcut::text_list));
          overrides.push_back({s.path, list});
        }
      }
      for (const auto& kv : f.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects path=value, got '" + kv + "'");
        overrides.push_back({kv.substr(0, eq), parse_flag_value(kv.substr(eq + 1), false)});
      }
      std::optional<fs::path> config_file;
      if (!f.config.empty()) config_file = f.config;
      std::optional<std::string> seed;
      if (sub->count("--seed")) seed = f.seed;
      inv = resolve(name, config_file, overrides, seed, f.replicas, f.out);
    } catch (...) {
      const auto fl = classify(std::current_exception());
      const auto record = failure_json(name, {fl.code, fl.message, 2});
      std::cerr << record.dump() << '\n';
      write_error_file(f.out, record);
      return 2;
    }
    return execute(inv, std::cout, std::cerr);
  }
  return 2;
}

}  // namespace econoscale::cli
