#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qerasure {

/// One bit per element, values 0 or 1.
using Bits = std::vector<std::uint8_t>;

inline std::size_t count_differences(const Bits& a, const Bits& b) {
  if (a.size() != b.size()) throw std::invalid_argument("count_differences: length mismatch");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] != b[i]);
  return n;
}

inline Bits xor_bits(const Bits& a, const Bits& b) {
  if (a.size() != b.size()) throw std::invalid_argument("xor_bits: length mismatch");
  Bits out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

/// Lowercase hex, most significant bit first; the last nibble is zero-padded.
inline std::string to_hex(const Bits& bits) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve((bits.size() + 3) / 4);
  for (std::size_t i = 0; i < bits.size(); i += 4) {
    unsigned nibble = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      nibble <<= 1;
      if (i + k < bits.size()) nibble |= bits[i + k] & 1u;
    }
    out.push_back(kDigits[nibble]);
  }
  return out;
}

inline Bits from_hex(std::string_view hex, std::size_t length) {
  if (hex.size() != (length + 3) / 4) throw std::invalid_argument("from_hex: length does not match digits");
  Bits bits;
  bits.reserve(length);
  for (char c : hex) {
    unsigned v;
    if (c >= '0' && c <= '9') v = static_cast<unsigned>(c - '0');
    else if (c >= 'a' && c <= 'f') v = static_cast<unsigned>(c - 'a' + 10);
    else throw std::invalid_argument("from_hex: invalid digit");
    for (int k = 3; k >= 0 && bits.size() < length; --k) bits.push_back((v >> k) & 1u);
  }
  return bits;
}

}  // namespace qerasure
