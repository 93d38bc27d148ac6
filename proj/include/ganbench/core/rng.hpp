#pragma once

#include <cmath>
#include <cstdint>

namespace ganbench::core {

// Portable RNG used for every random draw in the project: xoshiro256++
// seeded through splitmix64. Both algorithms are fully specified at the bit
// level, so datasets and initial weights reproduce exactly across platforms
// and implementations (the C++ standard does not pin down distribution
// algorithms, hence the hand-rolled uniform/normal below).
//
// Stream splitting: child streams are derived as
//   child_seed = mix64(seed ^ (GOLDEN * (stream + 1)))
// where mix64 is the splitmix64 finalizer. Derivation is stateless, so
// per-image / per-purpose streams can be created in any order or in
// parallel without changing the result.

inline uint64_t mix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline uint64_t derive_stream(uint64_t seed, uint64_t stream) {
  return mix64(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
}

class Rng {
 public:
  explicit Rng(uint64_t seed = 0) {
    uint64_t z = seed;
    for (int i = 0; i < 4; ++i) s_[i] = splitmix_next(z);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  static Rng child(uint64_t seed, uint64_t stream) { return Rng(derive_stream(seed, stream)); }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0,1) with 53 bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased uniform integer in [0, n).
  uint64_t below(uint64_t n) {
    const uint64_t lim = n == 0 ? 0 : UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= lim);
    return x % n;
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  static uint64_t splitmix_next(uint64_t& z) {
    z += 0x9E3779B97F4A7C15ULL;
    uint64_t r = z;
    r = (r ^ (r >> 30)) * 0xBF58476D1CE4E5B9ULL;
    r = (r ^ (r >> 27)) * 0x94D049BB133111EBULL;
    return r ^ (r >> 31);
  }

  uint64_t s_[4];
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace ganbench::core
