#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "amsf/metrics.hpp"

TEST(HarmonicMean, Examples) {
  for (double a : {0.01, 0.5, 1.0, 7.25}) EXPECT_DOUBLE_EQ(amsf::harmonic_mean({a, a}), a);
  // 2 * 0.72 * 0.73 / 1.45 = 0.72497 -> "0.72"
  const double hm = amsf::harmonic_mean({0.72, 0.73});
  EXPECT_NEAR(hm, 0.7249655172413793, 1e-12);
  EXPECT_EQ(std::round(hm * 100) / 100, 0.72);
  EXPECT_EQ(amsf::harmonic_mean({0.4, 0.0}), 0.0);
  EXPECT_EQ(amsf::harmonic_mean({0.4, -0.1}), 0.0);
}

TEST(HarmonicMean, EmptyThrows) { EXPECT_THROW(amsf::harmonic_mean({}), amsf::ConfigError); }

TEST(HarmonicMean, Properties) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.01, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(2 + trial % 5);
    for (auto& x : v) x = u(gen);
    const double hm = amsf::harmonic_mean(v);
    const double am = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    EXPECT_LE(hm, am + 1e-12);
    EXPECT_GE(hm, *std::min_element(v.begin(), v.end()) - 1e-12);

    const double alpha = u(gen);
    std::vector<double> scaled = v;
    for (auto& x : scaled) x *= alpha;
    EXPECT_NEAR(amsf::harmonic_mean(scaled), alpha * hm, 1e-12);

    std::vector<double> shuffled = v;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    EXPECT_NEAR(amsf::harmonic_mean(shuffled), hm, 1e-12);
  }
}

TEST(BalanceReport, Examples) {
  auto even = amsf::balance_report({0.5, 0.5}, 0.05);
  EXPECT_FALSE(even.dominant_style);
  EXPECT_DOUBLE_EQ(even.harmonic_mean, 0.5);

  auto skew = amsf::balance_report({0.9, 0.1}, 0.05);
  ASSERT_TRUE(skew.dominant_style);
  EXPECT_EQ(*skew.dominant_style, 0u);
  EXPECT_NEAR(skew.harmonic_mean, 0.18, 1e-12);  // 2 * 0.9 * 0.1 / 1.0

  auto close = amsf::balance_report({0.24, 0.23}, 0.05);
  EXPECT_FALSE(close.dominant_style);
  EXPECT_NEAR(close.harmonic_mean, 0.2349, 1e-4);

  auto three = amsf::balance_report({0.2, 0.6, 0.3}, 0.1);
  ASSERT_TRUE(three.dominant_style);
  EXPECT_EQ(*three.dominant_style, 1u);
}

TEST(BalanceReport, EqualAlignmentsHaveNoDominant) {
  for (std::size_t n = 1; n <= 5; ++n) {
    EXPECT_FALSE(amsf::balance_report(std::vector<double>(n, 0.37), 0.0).dominant_style);
  }
}

TEST(BalanceReport, Errors) {
  EXPECT_THROW(amsf::balance_report({}, 0.05), amsf::ConfigError);
  EXPECT_THROW(amsf::balance_report({0.1}, -1.0), amsf::ConfigError);
}
