#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace econoscale::portfolio {

struct ReturnPair {
  std::vector<double> a;
  std::vector<double> b;

  std::size_t size() const noexcept { return a.size(); }
  /// Equal lengths, at least 100 finite returns each.
  void validate() const;
  ReturnPair swapped() const { return {b, a}; }
};

/// Gaussian/tail partition: a sample is in the tail when either asset's
/// |return| exceeds threshold times that asset's standard deviation.
struct RiskSplit {
  double threshold = 0.0;
  std::vector<char> tail_mask;  // 1 = tail, 0 = gaussian part
  std::size_t tail_count = 0;
  std::size_t gaussian_count = 0;
  double std_a = 0.0;
  double std_b = 0.0;
};

/// The mask rule alone: requires equal lengths but no minimum sample or tail
/// count. Population standard deviations.
std::vector<char> tail_mask(const ReturnPair& pair, double threshold);

/// Throws insufficient_data "threshold too high" with fewer than `min_tail`
/// tail samples.
RiskSplit split_returns(const ReturnPair& pair, double threshold, std::size_t min_tail = 30);

enum class Mode { variance, tail };

struct PortfolioResult {
  Mode mode = Mode::variance;
  double threshold = 0.0;
  double weight_a = 0.0;  // weight_b = 1 - weight_a
  double std = 0.0;
  double max_drawdown = 0.0;
  std::size_t sample_count = 0;
  std::size_t tail_count = 0;  // samples the risk estimate used (all, in variance mode)

  double weight_b() const noexcept { return 1.0 - weight_a; }
};

/// Long-only minimum-risk weight of two assets, w_a = (s_bb - s_ab) /
/// (s_aa + s_bb - 2 s_ab) clipped to [0, 1]. Variance mode uses the full-sample
/// covariance; tail mode the raw second moments over the tail samples, so the
/// risk it minimises is the mean square of the large moves themselves.
PortfolioResult optimize_two_asset(const ReturnPair& pair, Mode mode, double threshold = 2.0);

struct PortfolioMetrics {
  double std = 0.0;
  double max_drawdown = 0.0;
};

PortfolioMetrics evaluate_portfolio(const ReturnPair& pair, double weight_a);

/// Largest peak-to-trough fraction of the compounded value path prod(1 + r),
/// starting from value 1. A path that reaches zero has drawdown 1.
double max_drawdown(const std::vector<double>& returns);

/// Two assets with independent Gaussian cores and a shared crash component:
/// r = mu + core_vol * z + loading * J. J is drawn from N(jump_mean, jump_sd)
/// on every day of a crash episode and is 0 otherwise; an episode starts on
/// a calm day with probability jump_prob and lasts jump_duration days. The
/// drift mu offsets the mean crash loss so both assets have zero expected
/// return.
struct JumpPairSpec {
  std::size_t length = 2500;
  double core_vol_a = 0.003;
  double core_vol_b = 0.008;
  double loading_a = 1.0;
  double loading_b = 0.1;
  double jump_prob = 0.004;
  std::size_t jump_duration = 10;
  double jump_mean = -0.03;
  double jump_sd = 0.009;

  void validate() const;
  /// Long-run fraction of days inside a crash episode.
  double crash_fraction() const;
};

ReturnPair generate_common_jump_pair(const JumpPairSpec& spec, std::uint64_t seed);

// CSV with a header row and either two return columns or a leading time
// column followed by two return columns.
ReturnPair parse_pair_csv(std::istream& in, const std::string& source_name);
ReturnPair load_pair_csv(const std::filesystem::path& path);
void write_pair_csv(std::ostream& out, const ReturnPair& pair);

std::string_view to_string(Mode mode) noexcept;

}  // namespace econoscale::portfolio
