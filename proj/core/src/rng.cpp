#include "reamot/rng.hpp"

#include <cmath>
#include <numbers>

namespace reamot {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> keys)
    : key_(splitmix64(seed)) {
  for (auto k : keys) key_ = splitmix64(key_ ^ splitmix64(k + 0x632BE59BD9B4E019ULL));
}

std::uint64_t CounterRng::next() noexcept {
  return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_);
}

double CounterRng::uniform() noexcept {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double CounterRng::truncated_normal(double sigma, double limit) noexcept {
  if (sigma <= 0.0) return 0.0;
  while (true) {
    const double z = normal();
    if (std::abs(z) <= limit) return z * sigma;
  }
}

std::int64_t CounterRng::poisson(double mean) noexcept {
  if (mean <= 0.0) return 0;
  const double threshold = std::exp(-mean);
  std::int64_t k = 0;
  double p = uniform();
  while (p > threshold) {
    ++k;
    p *= uniform();
  }
  return k;
}

}  // namespace reamot
