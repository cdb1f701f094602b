#pragma once

#include <cstdint>

namespace itercert {

/// splitmix64; also usable as a stateless hash of (seed, index).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t operator()() { return mix(state_ += 0x9E3779B97F4A7C15ULL); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1p-53; }

  /// Uniform in [0, bound); bound > 0. Modulo bias is below 2^-40 for the
  /// bounds used here.
  std::uint64_t below(std::uint64_t bound) { return (*this)() % bound; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return mix(mix(mix(seed + 0x9E3779B97F4A7C15ULL) ^ a) ^ (b * 0xD6E8FEB86659FD93ULL));
  }

 private:
  std::uint64_t state_;
};

}  // namespace itercert
