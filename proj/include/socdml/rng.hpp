#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace socdml {

// std::mt19937_64's raw output sequence is pinned by the standard; the
// standard *distributions* are not. Everything random in this project goes
// through the helpers below so that a seed reproduces bit-identical results
// on any platform.

using Rng = std::mt19937_64;

/// splitmix64 step; used to derive independent seed streams from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform integer in [0, bound) by rejection; bound must be > 0.
inline std::uint64_t next_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double next_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (one value per call, cache discarded).
inline double next_normal(Rng& rng) {
  double u1 = next_unit(rng);
  while (u1 <= 0.0) u1 = next_unit(rng);
  const double u2 = next_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(next_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

/// First k entries of a Fisher-Yates pass over [0, n), returned sorted.
std::vector<int> sample_without_replacement(Rng& rng, int n, int k);

}  // namespace socdml
