#pragma once

#include <cstdint>
#include <initializer_list>

namespace reamot {

// Counter-based generator: the stream is a pure function of (seed, keys), so
// draws for a given (frame, object) do not depend on iteration order.
// Distributions are implemented here rather than taken from <random> so that
// outputs are identical across standard library implementations.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

  std::uint64_t next() noexcept;
  double uniform() noexcept;  // [0, 1)
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept;  // standard normal, Box-Muller
  // Normal draw rejected and redrawn outside +-`limit` standard deviations.
  double truncated_normal(double sigma, double limit = 3.0) noexcept;
  std::int64_t poisson(double mean) noexcept;  // Knuth's product method

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace reamot
