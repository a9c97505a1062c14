#pragma once

// Counter-based random numbers: every draw is a pure function of a key, so
// serial and parallel runs see identical streams.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mfg {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t hash_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                        std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed ^ 0x6A09E667F3BCC908ull);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b + 0x3C6EF372FE94F82Bull));
  h = splitmix64(h ^ (c + 0xA54FF53A5F1D36F1ull));
  return h;
}

/// Uniform in the open interval (0, 1).
inline double unit_open(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal keyed on (seed, a, b, c) via Box-Muller.
inline double counter_normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  const std::uint64_t h1 = hash_key(seed, a, b, c);
  const std::uint64_t h2 = splitmix64(h1 ^ 0xD1B54A32D192ED03ull);
  const double u1 = unit_open(h1);
  const double u2 = unit_open(h2);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Derives an independent seed for a named purpose (stream tag, index).
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
  return hash_key(seed, tag, index, 0x5DEECE66Dull);
}

// Stream tags.
inline constexpr std::uint64_t kInitialStream = 1;
inline constexpr std::uint64_t kStepStream = 2;
inline constexpr std::uint64_t kShuffleStream = 3;
inline constexpr std::uint64_t kBootstrapStream = 4;
inline constexpr std::uint64_t kProjectionStream = 5;
inline constexpr std::uint64_t kIterationStream = 6;
inline constexpr std::uint64_t kSamplerStream = 7;

/// Sequential view over a counter stream; convenient for shuffles and test samplers.
class CounterStream {
 public:
  explicit CounterStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_bits() { return hash_key(seed_, counter_++, 0xB5ull, 0); }
  double uniform() { return unit_open(next_bits()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    const double z = counter_normal(seed_, counter_, 0xA7ull, 0);
    ++counter_;
    return z;
  }
  /// Uniform integer in [0, n); n > 0.
  std::uint64_t index(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace mfg
