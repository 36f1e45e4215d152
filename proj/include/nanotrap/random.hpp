#pragma once

#include <cstdint>

namespace nanotrap {

/// Counter-based generator: draw n returns splitmix64(seed + (n + 1) * 0x9E3779B97F4A7C15).
/// Output depends only on (seed, counter), so streams are reproducible on
/// every platform and standard library.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0) : seed_(seed), counter_(counter) {}

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal, Box-Muller (both draws consumed, cosine branch returned).
  double normal();
  /// Poisson deviate: Knuth multiplication for mean < 10, Hormann's PTRS
  /// transformed rejection otherwise.
  std::int64_t poisson(double mean);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace nanotrap
