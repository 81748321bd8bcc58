#include <gtest/gtest.h>

#include <cmath>

#include "caps/stats.hpp"

using namespace caps;

TEST(Wilson, KnownInterval) {
  // 81 of 263 at 95%: (0.2553, 0.3662), a textbook example.
  const auto ci = wilson_interval(81, 263);
  EXPECT_NEAR(ci.lo, 0.2553, 5e-4);
  EXPECT_NEAR(ci.hi, 0.3662, 5e-4);
}

TEST(Wilson, EdgesStayInsideTheUnitInterval) {
  const auto zero = wilson_interval(0, 50);
  EXPECT_EQ(zero.lo, 0.0);
  EXPECT_GT(zero.hi, 0.0);
  const auto all = wilson_interval(50, 50);
  EXPECT_LT(all.lo, 1.0);
  EXPECT_NEAR(all.hi, 1.0, 1e-12);
}

TEST(Interval, Overlap) {
  EXPECT_TRUE((Interval{0.1, 0.3}.overlaps({0.3, 0.5})));
  EXPECT_FALSE((Interval{0.1, 0.3}.overlaps({0.31, 0.5})));
}

TEST(RunningStats, MatchesTwoPassFormulas) {
  const double xs[] = {2, 4, 4, 4, 5, 5, 7, 9};
  RunningStats s;
  for (double x : xs) s.add(x);
  EXPECT_EQ(s.count(), 8);
  EXPECT_DOUBLE_EQ(s.mean(), 5.0);
  EXPECT_NEAR(s.variance(), 32.0 / 7.0, 1e-12);
  EXPECT_NEAR(s.stddev(), std::sqrt(32.0 / 7.0), 1e-12);
}

TEST(ChiSquare, UniformCountsHaveNoEvidence) {
  const std::vector<std::int64_t> even = {100, 100, 100, 100};
  const auto r = chi_square_uniform(even);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.dof, 3);
  EXPECT_NEAR(r.p_value, 1.0, 1e-12);
}

TEST(ChiSquare, KnownStatisticAndPValue) {
  // Statistic 10 on 3 degrees of freedom has p = 0.018566.
  const std::vector<std::int64_t> counts = {30, 20, 20, 10};
  const auto r = chi_square_uniform(counts);
  EXPECT_DOUBLE_EQ(r.statistic, 10.0);
  EXPECT_NEAR(r.p_value, 0.018566, 1e-5);
}
