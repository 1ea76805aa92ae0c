#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace maed {

// All randomness in the simulator flows through this header so that a seed
// pins every draw bit-exactly, independent of the platform's <random>
// distribution implementations. mt19937_64 provides the stream (its output
// sequence is fixed by the standard); transformations to uniforms and
// Gaussians are done by hand below.

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Child-stream seed for (master, a, b), e.g. a = SNR index, b = frame index.
// Results are independent of thread scheduling by construction.
inline uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0) {
  uint64_t s = splitmix64(master);
  s = splitmix64(s ^ (a + 0x9E3779B97F4A7C15ULL));
  s = splitmix64(s ^ (b + 0xD1B54A32D192ED03ULL));
  return s;
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(splitmix64(seed)) {}

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Circularly-symmetric complex Gaussian CN(0, 1): E[z] = 0, E|z|^2 = 1.
  std::complex<double> complex_gaussian() {
    // Polar Box-Muller; u1 in (0, 1] keeps the log finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double theta = 2.0 * std::numbers::pi * uniform01();
    const double r = std::sqrt(-std::log(u1));
    return {r * std::cos(theta), r * std::sin(theta)};
  }

  bool bit() { return (next_u64() >> 63) != 0; }

  /// Uniform integer in [0, n), rejection-sampled (n >= 1).
  uint64_t below(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace maed
