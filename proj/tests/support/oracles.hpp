#pragma once

// Reference computations written independently of the library: direct
// definitions, O(n^2) where that is simplest, long double accumulation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

namespace econoscale::oracle {

/// Mean of values[i - window + 1 .. i], summed directly.
inline double trailing_mean(const std::vector<double>& v, std::size_t i, std::size_t window) {
  long double s = 0.0L;
  for (std::size_t k = i + 1 - window; k <= i; ++k) s += v[k];
  return static_cast<double>(s / static_cast<long double>(window));
}

struct Run {
  std::size_t start;
  std::size_t length;
  bool censored;
  bool operator==(const Run&) const = default;
};

/// Quiet condition evaluated sample by sample, then maximal runs collected.
inline std::vector<Run> quiet_runs(const std::vector<double>& v, std::size_t window, double delta,
                                   bool relative = false) {
  std::vector<Run> out;
  const std::size_t begin = window - 1;
  std::size_t i = begin;
  while (i < v.size()) {
    auto quiet = [&](std::size_t t) {
      const double m = trailing_mean(v, t, window);
      const double d = std::abs(v[t] - m);
      return relative ? d / m <= delta : d <= delta;
    };
    if (!quiet(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < v.size() && quiet(j)) ++j;
    out.push_back({i, j - i, j == v.size()});
    i = j;
  }
  return out;
}

/// R(n) = #{lengths >= n}.
inline double survival_count(const std::vector<std::size_t>& lengths, std::size_t n) {
  return static_cast<double>(std::count_if(lengths.begin(), lengths.end(), [&](auto l) { return l >= n; }));
}

/// Gini as half the relative mean absolute difference, O(n^2).
inline double gini(const std::vector<double>& x) {
  long double diff = 0.0L, sum = 0.0L;
  for (double a : x) {
    sum += a;
    for (double b : x) diff += std::abs(a - b);
  }
  const auto n = static_cast<long double>(x.size());
  return static_cast<double>(diff / (2.0L * n * sum));
}

/// Kolmogorov-Smirnov distance of a sample against a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double> x, Cdf cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

struct Line {
  double slope;
  double intercept;
  double r_squared;
};

inline Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  long double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const long double b = sxy / sxx;
  return {static_cast<double>(b), static_cast<double>(my - b * mx),
          syy > 0 ? static_cast<double>(sxy * sxy / (sxx * syy)) : 1.0};
}

inline std::vector<double> gamma_samples(double shape, double mean, std::size_t n, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> g(shape, mean / shape);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

/// Inverse-CDF samples of P(X >= x) = (x / x_min)^-index.
inline std::vector<double> pareto_samples(double index, double x_min, std::size_t n, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = x_min * std::pow(1.0 - u(rng), -1.0 / index);
  return v;
}

/// Peak-to-trough fraction of the compounded path, written out directly.
inline double max_drawdown(const std::vector<double>& r) {
  std::vector<double> value{1.0};
  for (double x : r) value.push_back(value.back() * (1.0 + x));
  double worst = 0.0;
  for (std::size_t i = 0; i < value.size(); ++i) {
    for (std::size_t j = i; j < value.size(); ++j) worst = std::max(worst, (value[i] - value[j]) / value[i]);
  }
  return std::min(worst, 1.0);
}

}  // namespace econoscale::oracle
