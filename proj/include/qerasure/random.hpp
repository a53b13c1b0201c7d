#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace qerasure {

/// The engine every session draws from. Only raw 64-bit outputs are used, so
/// transcripts do not depend on the standard library's distribution classes.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; derives independent stage seeds from one user seed.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stage identifiers for mix_seed.
enum class Stream : std::uint64_t { rounds = 1, sample = 2, reconcile = 3, amplify = 4 };

inline Rng make_rng(std::uint64_t seed, Stream stream) {
  return Rng(mix_seed(seed, static_cast<std::uint64_t>(stream)));
}

template <typename Engine>
int random_bit(Engine& rng) {
  return static_cast<int>(rng() >> 63);
}

/// Uniform double in [0, 1) with 53 bits of resolution.
template <typename Engine>
double uniform01(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
template <typename Engine>
std::uint64_t uniform_below(Engine& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const unsigned __int128 m = static_cast<unsigned __int128>(rng()) * bound;
    if (static_cast<std::uint64_t>(m) >= threshold) {
      return static_cast<std::uint64_t>(m >> 64);
    }
  }
}

/// Fisher-Yates permutation of 0..n-1. std::shuffle's algorithm is unspecified,
/// which would break cross-toolchain reproducibility.
template <typename Engine>
std::vector<std::size_t> random_permutation(std::size_t n, Engine& rng) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace qerasure
