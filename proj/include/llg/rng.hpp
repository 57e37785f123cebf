#pragma once

#include <cstdint>

namespace llg {

/// splitmix64 generator. Chosen over std::mt19937 distributions because the
/// byte-for-byte output stream must be identical across standard libraries
/// for the determinism guarantees of the experiment runner.
struct Rng {
  std::uint64_t state = 0x9E3779B97F4A7C15ull;

  explicit Rng(std::uint64_t seed = 1) : state(seed + 0x9E3779B97F4A7C15ull) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Uniform in [-1, 1].
  double symmetric() { return uniform(-1.0, 1.0); }
};

}  // namespace llg
