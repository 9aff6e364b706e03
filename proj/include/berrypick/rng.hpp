#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace berrypick {

// Stateless counter-based generator: every draw is a pure function of
// (seed, stream, counter), so draws can be taken in any order or in parallel
// and still agree with a serial run. Mixing is two rounds of splitmix64.
class CounterRng {
public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  // Independent child generator.
  constexpr CounterRng split(std::uint64_t stream) const {
    return CounterRng(key_, stream);
  }

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return mix(key_ + mix(counter));
  }

  // Uniform in [0, 1).
  constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  double uniform(std::uint64_t counter, double lo, double hi) const {
    return lo + (hi - lo) * uniform(counter);
  }

  // Standard normal via Box-Muller on counters 2c and 2c+1.
  double normal(std::uint64_t counter) const {
    const double u1 = 1.0 - uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
};

// Sequential view over a CounterRng for code that just wants "the next draw".
class RngStream {
public:
  explicit RngStream(CounterRng rng) : rng_(rng) {}
  double uniform() { return rng_.uniform(counter_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return rng_.normal(counter_++); }
  int integer(int lo, int hi) { // inclusive
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }

private:
  CounterRng rng_;
  std::uint64_t counter_ = 0;
};

} // namespace berrypick
