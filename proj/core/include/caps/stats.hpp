#pragma once

#include <cstdint>
#include <span>

namespace caps {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool overlaps(const Interval& other) const { return lo <= other.hi && other.lo <= hi; }
};

/// Wilson score interval for k successes in n trials.
Interval wilson_interval(std::int64_t k, std::int64_t n, double z = 1.959963984540054);

/// Welford accumulator; variance() is the unbiased sample variance.
class RunningStats {
 public:
  void add(double x);
  std::int64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;
  double stddev() const;

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Pearson goodness-of-fit against equal expected counts.
ChiSquareResult chi_square_uniform(std::span<const std::int64_t> counts);

}  // namespace caps
