#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "econoscale/error.hpp"
#include "econoscale/regression.hpp"
#include "econoscale/rng.hpp"
#include "econoscale/text.hpp"
#include "oracles.hpp"

using namespace econoscale;

TEST(FitLine, MatchesTheOracle) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::vector<double> x(200), y(200);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(i) * 0.1;
    y[i] = 2.0 - 0.7 * x[i] + z(rng);
  }
  const auto f = fit_line(x, y);
  const auto o = oracle::least_squares(x, y);
  EXPECT_NEAR(f.slope, o.slope, 1e-12);
  EXPECT_NEAR(f.intercept, o.intercept, 1e-12);
  EXPECT_NEAR(f.r_squared, o.r_squared, 1e-12);
  EXPECT_EQ(f.points, 200u);
}

TEST(FitLine, ExactLine) {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  const auto f = fit_line(x, y);
  EXPECT_DOUBLE_EQ(f.slope, 2.0);
  EXPECT_DOUBLE_EQ(f.intercept, 1.0);
  EXPECT_DOUBLE_EQ(f.r_squared, 1.0);
}

TEST(FitLine, NeedsDistinctAbscissae) {
  const std::vector<double> x{1, 1, 1}, y{1, 2, 3};
  EXPECT_THROW(fit_line(x, y), Error);
}

TEST(Isotonic, PoolsViolators) {
  const std::vector<double> y{1, 3, 2, 4, 0};
  const auto m = isotonic_increasing(y);
  EXPECT_EQ(m, (std::vector<double>{1, 2.25, 2.25, 2.25, 2.25}));
  const std::vector<double> sorted{1, 2, 3};
  EXPECT_EQ(isotonic_increasing(sorted), sorted);
}

TEST(Quantile, Interpolates) {
  const std::vector<double> s{0, 10, 20};
  EXPECT_EQ(sorted_quantile(s, 0.0), 0.0);
  EXPECT_EQ(sorted_quantile(s, 0.25), 5.0);
  EXPECT_EQ(sorted_quantile(s, 1.0), 20.0);
}

TEST(LogSpace, Endpoints) {
  const auto v = log_space(1.0, 1000.0, 4);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v.front(), 1.0);
  EXPECT_EQ(v.back(), 1000.0);
  EXPECT_NEAR(v[1], 10.0, 1e-12);
}

TEST(Text, NumbersRoundTrip) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(parse_number(format_number(x)), x);
  }
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(3.0), "3");
}

TEST(Text, RejectsGarbage) {
  EXPECT_FALSE(parse_number("abc").has_value());
  EXPECT_FALSE(parse_number("1.5x").has_value());
  EXPECT_FALSE(parse_number("").has_value());
  EXPECT_EQ(parse_number(" 2.5 "), 2.5);
}

TEST(Text, SplitsAndTrims) {
  const auto f = split_fields(" a, b ,c,");
  ASSERT_EQ(f.size(), 4u);
  EXPECT_EQ(f[0], "a");
  EXPECT_EQ(f[1], "b");
  EXPECT_EQ(f[2], "c");
  EXPECT_EQ(f[3], "");
}

TEST(SplitMix64, KnownSequence) {
  // reference values of the published generator seeded with 0
  SplitMix64 g(0);
  EXPECT_EQ(g(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(g(), 0x6E789E6AA1B965F4ULL);
}

TEST(SplitMix64, BelowIsUniform) {
  SplitMix64 g(5);
  std::vector<int> c(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++c[g.below(7)];
  for (int k : c) EXPECT_NEAR(k, n / 7.0, 5 * std::sqrt(n / 7.0));
}

TEST(SplitMix64, OpenIntervalAndNormalMoments) {
  SplitMix64 g(6);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = g.uniform_open();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double z = g.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(SplitMix64, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), 1u);
  EXPECT_EQ(derive_seed(9, 3), derive_seed(9, 3));
}
