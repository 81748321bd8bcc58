#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace caps::detail {

/// SplitMix64; small state so a fresh stream per judge call is cheap.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal() {
    const double u1 = 1.0 - unit();
    const double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t state_;
};

/// Uniform integer in [0, n) drawn from a 64-bit engine (bitmask rejection,
/// identical on every platform).
template <typename Engine>
std::uint64_t uniform_below(Engine& eng, std::uint64_t n) {
  if (n <= 1) return 0;
  std::uint64_t mask = n - 1;
  mask |= mask >> 1;
  mask |= mask >> 2;
  mask |= mask >> 4;
  mask |= mask >> 8;
  mask |= mask >> 16;
  mask |= mask >> 32;
  while (true) {
    const std::uint64_t x = static_cast<std::uint64_t>(eng()) & mask;
    if (x < n) return x;
  }
}

/// Fisher-Yates with uniform_below, so shuffles are reproducible across
/// standard libraries.
template <typename It, typename Engine>
void shuffle(It first, It last, Engine& eng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t k = n; k > 1; --k) {
    const auto pick = uniform_below(eng, k);
    std::swap(first[static_cast<std::ptrdiff_t>(k - 1)], first[static_cast<std::ptrdiff_t>(pick)]);
  }
}

template <typename Engine>
double unit(Engine& eng) {
  return static_cast<double>(static_cast<std::uint64_t>(eng()) >> 11) * 0x1.0p-53;
}

}  // namespace caps::detail
