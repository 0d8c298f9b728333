#pragma once

#include <cstdint>
#include <limits>

namespace econoscale {

/// SplitMix64: a 64-bit-state generator (Steele, Lea & Flood 2014).
///
/// Every stochastic component in the library draws from this engine so that a
/// (config, seed) pair fixes the output bit-for-bit on a given platform. The
/// uniform conversions below are defined here rather than delegated to
/// <random> distributions, whose algorithms are implementation-defined.
///
/// Stream splitting: replica `r` of a run seeded with `s` uses
/// `derive_seed(s, r)`, i.e. the SplitMix64 finaliser applied to
/// `s ^ mix(r + 1)`. Distinct stream ids give statistically independent
/// sequences; stream ids never alias the parent seed.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n), n > 0 (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Standard normal deviate (Marsaglia polar method).
  double normal() noexcept;

  std::uint64_t state() const noexcept { return state_; }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Seed of sub-stream `stream` derived from `seed` (see SplitMix64).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return SplitMix64::mix(seed ^ SplitMix64::mix((stream + 1) * 0x9E3779B97F4A7C15ULL));
}

}  // namespace econoscale
