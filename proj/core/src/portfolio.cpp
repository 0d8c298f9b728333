#include "econoscale/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "econoscale/error.hpp"
#include "econoscale/regression.hpp"
#include "econoscale/rng.hpp"
#include "econoscale/text.hpp"

namespace econoscale::portfolio {

void ReturnPair::validate() const {
  require(a.size() == b.size(), "return series differ in length (" + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
  require(a.size() >= 100, "need at least 100 aligned returns, got " + std::to_string(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    require(std::isfinite(a[i]) && std::isfinite(b[i]),
            "non-finite return at index " + std::to_string(i));
  }
}

std::vector<char> tail_mask(const ReturnPair& pair, double threshold) {
  require(pair.a.size() == pair.b.size(), "return series differ in length");
  require(std::isfinite(threshold) && threshold > 0.0, "tail threshold must be positive");
  const double sa = pair.a.empty() ? 0.0 : std::sqrt(variance(pair.a));
  const double sb = pair.b.empty() ? 0.0 : std::sqrt(variance(pair.b));
  std::vector<char> mask(pair.size(), 0);
  for (std::size_t i = 0; i < pair.size(); ++i) {
    mask[i] = std::abs(pair.a[i]) > threshold * sa || std::abs(pair.b[i]) > threshold * sb;
  }
  return mask;
}

RiskSplit split_returns(const ReturnPair& pair, double threshold, std::size_t min_tail) {
  pair.validate();
  RiskSplit split;
  split.threshold = threshold;
  split.std_a = std::sqrt(variance(pair.a));
  split.std_b = std::sqrt(variance(pair.b));
  split.tail_mask = tail_mask(pair, threshold);
  split.tail_count = static_cast<std::size_t>(std::count(split.tail_mask.begin(), split.tail_mask.end(), 1));
  split.gaussian_count = pair.size() - split.tail_count;
  if (split.tail_count < min_tail) {
    fail(ErrorCode::insufficient_data,
         "threshold too high: " + std::to_string(split.tail_count) + " tail samples at threshold " +
             format_number(threshold) + " (need " + std::to_string(min_tail) + ")");
  }
  return split;
}

namespace {

double clip01(double w) { return std::clamp(w, 0.0, 1.0); }

// Minimiser of w^2 saa + (1-w)^2 sbb + 2 w (1-w) sab over [0, 1]. The larger
// numerator is divided first so that swapping the assets gives 1 - w exactly.
double min_risk_weight(double saa, double sbb, double sab) {
  const double num_a = sbb - sab;
  const double num_b = saa - sab;
  const double den = num_a + num_b;
  if (!(den > 0.0)) return 0.5;
  if (num_a >= num_b) return clip01(num_a / den);
  return 1.0 - clip01(num_b / den);
}

}  // namespace

PortfolioResult optimize_two_asset(const ReturnPair& pair, Mode mode, double threshold) {
  pair.validate();
  PortfolioResult result;
  result.mode = mode;
  result.sample_count = pair.size();
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  if (mode == Mode::variance) {
    const double ma = mean(pair.a);
    const double mb = mean(pair.b);
    for (std::size_t i = 0; i < pair.size(); ++i) {
      const double da = pair.a[i] - ma;
      const double db = pair.b[i] - mb;
      saa += da * da;
      sbb += db * db;
      sab += da * db;
    }
    result.tail_count = pair.size();
  } else {
    const auto split = split_returns(pair, threshold);
    result.threshold = threshold;
    for (std::size_t i = 0; i < pair.size(); ++i) {
      if (!split.tail_mask[i]) continue;
      saa += pair.a[i] * pair.a[i];
      sbb += pair.b[i] * pair.b[i];
      sab += pair.a[i] * pair.b[i];
    }
    result.tail_count = split.tail_count;
  }
  result.weight_a = min_risk_weight(saa, sbb, sab);
  const auto m = evaluate_portfolio(pair, result.weight_a);
  result.std = m.std;
  result.max_drawdown = m.max_drawdown;
  return result;
}

double max_drawdown(const std::vector<double>& returns) {
  double value = 1.0;
  double peak = 1.0;
  double worst = 0.0;
  for (double r : returns) {
    value *= 1.0 + r;
    if (value <= 0.0) return 1.0;
    peak = std::max(peak, value);
    worst = std::max(worst, (peak - value) / peak);
  }
  return worst;
}

PortfolioMetrics evaluate_portfolio(const ReturnPair& pair, double weight_a) {
  require(weight_a >= 0.0 && weight_a <= 1.0, "weight_a must lie in [0,1]");
  require(pair.a.size() == pair.b.size(), "return series differ in length");
  std::vector<double> r(pair.size());
  const double wb = 1.0 - weight_a;
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = weight_a == 0.0 ? pair.b[i] : wb == 0.0 ? pair.a[i] : weight_a * pair.a[i] + wb * pair.b[i];
  }
  PortfolioMetrics m;
  m.std = r.empty() ? 0.0 : std::sqrt(variance(r));
  m.max_drawdown = max_drawdown(r);
  return m;
}

void JumpPairSpec::validate() const {
  require(length >= 100, "jump pair length must be at least 100");
  require(core_vol_a >= 0.0 && core_vol_b >= 0.0, "core volatilities must be non-negative");
  require(jump_prob > 0.0 && jump_prob < 1.0, "jump_prob must lie in (0,1)");
  require(jump_duration >= 1, "jump_duration must be at least 1 day");
  require(jump_sd >= 0.0, "jump_sd must be non-negative");
}

double JumpPairSpec::crash_fraction() const {
  // renewal cycle: (1 - p) / p calm days on average, then an episode
  const double d = static_cast<double>(jump_duration);
  return d / (d + (1.0 - jump_prob) / jump_prob);
}

ReturnPair generate_common_jump_pair(const JumpPairSpec& spec, std::uint64_t seed) {
  spec.validate();
  SplitMix64 rng(seed);
  const double loss = spec.crash_fraction() * spec.jump_mean;
  const double mu_a = -loss * spec.loading_a;
  const double mu_b = -loss * spec.loading_b;
  ReturnPair pair;
  pair.a.resize(spec.length);
  pair.b.resize(spec.length);
  std::size_t remaining = 0;
  for (std::size_t i = 0; i < spec.length; ++i) {
    const double za = rng.normal();
    const double zb = rng.normal();
    if (remaining == 0 && rng.uniform01() < spec.jump_prob) remaining = spec.jump_duration;
    double common = 0.0;
    if (remaining > 0) {
      common = spec.jump_mean + spec.jump_sd * rng.normal();
      --remaining;
    }
    pair.a[i] = mu_a + spec.core_vol_a * za + spec.loading_a * common;
    pair.b[i] = mu_b + spec.core_vol_b * zb + spec.loading_b * common;
  }
  return pair;
}

ReturnPair parse_pair_csv(std::istream& in, const std::string& source_name) {
  ReturnPair pair;
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  const auto bad = [&](const std::string& what) {
    fail(ErrorCode::parse_error, source_name + ": line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split_fields(text);
    if (columns == 0) {
      if (fields.size() != 2 && fields.size() != 3) bad("expected 2 return columns, optionally after a time column");
      columns = fields.size();
      continue;
    }
    if (fields.size() != columns) {
      bad("expected " + std::to_string(columns) + " fields, got " + std::to_string(fields.size()));
    }
    const std::size_t off = columns - 2;
    const auto ra = parse_number(fields[off]);
    const auto rb = parse_number(fields[off + 1]);
    if (!ra || !rb) bad("returns must be numbers");
    pair.a.push_back(*ra);
    pair.b.push_back(*rb);
  }
  if (columns == 0) fail(ErrorCode::parse_error, source_name + ": missing header");
  return pair;
}

ReturnPair load_pair_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path.string());
  return parse_pair_csv(in, path.string());
}

void write_pair_csv(std::ostream& out, const ReturnPair& pair) {
  out << "t,return_a,return_b\n";
  for (std::size_t i = 0; i < pair.size(); ++i) {
    out << i << ',' << format_number(pair.a[i]) << ',' << format_number(pair.b[i]) << '\n';
  }
}

std::string_view to_string(Mode mode) noexcept {
  return mode == Mode::variance ? "variance" : "tail";
}

}  // namespace econoscale::portfolio
