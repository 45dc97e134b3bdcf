#pragma once

#include <cstdint>

namespace fitzcert {

/// Counter-based uniform draws: the value depends only on (seed, stream, counter),
/// so draw k of stream s is the same on every platform and in every thread.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed) : seed_{seed} {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform(std::uint64_t stream, std::uint64_t counter) const {
    const std::uint64_t h = mix(mix(mix(seed_) ^ stream) ^ counter);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
  }

  double uniform(std::uint64_t stream, std::uint64_t counter, double lo, double hi) const {
    return lo + (hi - lo) * uniform(stream, counter);
  }

  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t seed_;
};

} // namespace fitzcert
