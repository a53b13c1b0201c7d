#pragma once

// Classical post-processing of the sifted key: multi-pass parity bisection
// with shuffles, closed by a random-subset parity hash, and Toeplitz-matrix
// privacy amplification.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qerasure/bits.hpp"
#include "qerasure/random.hpp"

namespace qerasure {

struct ReconcileOptions {
  /// Expected error rate; sets the first-pass block size (about 0.73 / qber).
  double qber_estimate = 0.05;
  std::size_t max_passes = 64;
  /// Random-subset parities per verification. A residual difference passes
  /// one verification with probability 2^-verification_bits.
  std::size_t verification_bits = 64;
};

struct ReconciliationResult {
  Bits corrected_key;
  std::size_t parity_bits_leaked = 0;  // every public parity, verification included
  std::size_t verification_bits_leaked = 0;
  std::size_t rounds_of_bisection = 0;  // binary searches run, one per located error
  std::size_t passes = 0;
  bool success = false;
};

namespace detail {

inline std::size_t first_block_size(double qber_estimate, std::size_t n) {
  if (qber_estimate <= 0.0) return std::max<std::size_t>(n, 1);
  const double k = std::floor(0.73 / qber_estimate);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(k, 1.0)), 1, std::max<std::size_t>(n, 1));
}

template <typename Engine>
std::vector<std::uint64_t> random_mask(std::size_t n, Engine& rng) {
  std::vector<std::uint64_t> mask((n + 63) / 64);
  for (auto& w : mask) w = rng();
  if (n % 64 != 0) mask.back() &= (std::uint64_t{1} << (n % 64)) - 1;
  return mask;
}

inline int masked_parity(const Bits& key, const std::vector<std::uint64_t>& mask) {
  int p = 0;
  for (std::size_t i = 0; i < key.size(); ++i) {
    p ^= key[i] & static_cast<int>((mask[i / 64] >> (i % 64)) & 1u);
  }
  return p;
}

inline int parity_of(const Bits& key, const std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi) {
  int p = 0;
  for (std::size_t k = lo; k < hi; ++k) p ^= key[idx[k]];
  return p;
}

}  // namespace detail

/// Brings Bob's key into agreement with Alice's. Each pass shuffles the
/// positions with shared public randomness, compares block parities, and
/// locates one error per odd-parity block by bisection. Block sizes double
/// from pass to pass and restart from the first size once they reach the
/// key length. Verification runs before every pass; success is declared
/// only when it matches.
template <typename Engine>
ReconciliationResult reconcile(const Bits& alice, const Bits& bob, Engine& rng,
                               const ReconcileOptions& options = {}) {
  if (alice.size() != bob.size()) throw std::invalid_argument("reconcile: key lengths differ");
  const std::size_t n = alice.size();
  ReconciliationResult res;
  res.corrected_key = bob;
  Bits& key = res.corrected_key;

  const std::size_t first = detail::first_block_size(options.qber_estimate, n);
  std::size_t block = first;

  for (std::size_t pass = 0;; ++pass) {
    bool verified = true;
    for (std::size_t v = 0; v < options.verification_bits; ++v) {
      const auto mask = detail::random_mask(n, rng);
      if (detail::masked_parity(alice, mask) != detail::masked_parity(key, mask)) verified = false;
    }
    res.parity_bits_leaked += options.verification_bits;
    res.verification_bits_leaked += options.verification_bits;
    if (verified) {
      res.success = true;
      return res;
    }
    if (pass == options.max_passes) return res;

    ++res.passes;
    const auto perm = random_permutation(n, rng);
    for (std::size_t start = 0; start < n; start += block) {
      std::size_t lo = start;
      std::size_t hi = std::min(start + block, n);
      ++res.parity_bits_leaked;
      if (detail::parity_of(alice, perm, lo, hi) == detail::parity_of(key, perm, lo, hi)) continue;
      ++res.rounds_of_bisection;
      while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        ++res.parity_bits_leaked;
        if (detail::parity_of(alice, perm, lo, mid) != detail::parity_of(key, perm, lo, mid)) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      key[perm[lo]] ^= 1u;
    }
    block = block >= n ? first : std::min(block * 2, n);
  }
}

/// m = n - leaked - ceil(n * eve_info_rate) - safety, which may be <= 0.
inline long long amplified_length(std::size_t n, std::size_t leaked_bits, double eve_info_rate,
                                  std::size_t safety_bits) {
  const double eve = std::ceil(static_cast<double>(n) * eve_info_rate - 1e-9);
  return static_cast<long long>(n) - static_cast<long long>(leaked_bits) -
         static_cast<long long>(eve) - static_cast<long long>(safety_bits);
}

struct AmplifiedKey {
  Bits key;
  bool aborted = false;  // nothing extractable
};

/// Compresses `key` (n bits) to m bits with the m-by-n Toeplitz matrix
/// T[j][i] = t[j - i + n - 1], whose n + m - 1 diagonal bits come from `seed`.
/// The map is linear over GF(2).
inline AmplifiedKey privacy_amplify(const Bits& key, std::size_t leaked_bits, double eve_info_rate,
                                    std::size_t safety_bits, std::uint64_t seed) {
  if (!(eve_info_rate >= 0.0 && eve_info_rate <= 1.0)) {
    throw std::invalid_argument("privacy_amplify: eve_info_rate outside [0,1]");
  }
  const std::size_t n = key.size();
  const long long m_signed = amplified_length(n, leaked_bits, eve_info_rate, safety_bits);
  if (m_signed <= 0) return {{}, true};
  const auto m = static_cast<std::size_t>(m_signed);

  // out_j = parity(t[j .. j+n) & reversed key), packed 64 bits per word.
  const std::size_t diag_bits = n + m - 1;
  Rng rng = make_rng(seed, Stream::amplify);
  std::vector<std::uint64_t> diag((diag_bits + 63) / 64 + 1, 0);
  for (std::size_t w = 0; w < (diag_bits + 63) / 64; ++w) diag[w] = rng();
  if (diag_bits % 64 != 0) diag[(diag_bits - 1) / 64] &= (std::uint64_t{1} << (diag_bits % 64)) - 1;

  const std::size_t words = (n + 63) / 64;
  std::vector<std::uint64_t> rev(words, 0);
  for (std::size_t k = 0; k < n; ++k) {
    if (key[n - 1 - k]) rev[k / 64] |= std::uint64_t{1} << (k % 64);
  }

  AmplifiedKey out;
  out.key.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t base = j / 64;
    const unsigned shift = static_cast<unsigned>(j % 64);
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t window = diag[base + w] >> shift;
      if (shift != 0) window |= diag[base + w + 1] << (64 - shift);
      acc ^= window & rev[w];
    }
    out.key[j] = static_cast<std::uint8_t>(std::popcount(acc) & 1);
  }
  return out;
}

}  // namespace qerasure
