#ifndef PROCURE_RNG_HPP
#define PROCURE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace procure {

// Portable sampling helpers on top of mt19937_64. The standard
// distributions are implementation-defined, which would make archives
// differ between standard libraries.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ (stream * 0xd1342543de82ef95ULL + 1));
}

using Rng = std::mt19937_64;

/// Uniform real in [0, 1).
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, n). n must be positive.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

/// Uniform integer in [lo, hi].
inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(
                  uniform_index(rng, static_cast<std::uint64_t>(hi - lo) + 1));
}

/// Knuth's multiplicative Poisson sampler; fine for the small means used here.
inline int poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  const double limit = std::exp(-mean);
  int k = 0;
  double p = uniform01(rng);
  while (p > limit) {
    ++k;
    p *= uniform01(rng);
  }
  return k;
}

}  // namespace procure

#endif  // PROCURE_RNG_HPP
