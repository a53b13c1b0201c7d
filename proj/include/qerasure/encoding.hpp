#pragma once

// Alice's four preparations and the rotator settings both parties switch in.

#include <array>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "qerasure/quantum_core.hpp"

namespace qerasure {

enum class SourcePort : int { S1_top = 0, S2_bottom = 1 };

/// The detector whose click keeps a round for the given source.
constexpr Detector keep_detector(SourcePort source) {
  return source == SourcePort::S1_top ? Detector::D1 : Detector::D2;
}

// Alice's bit-1 rotators: upper -45 deg, lower +45 deg (physical plane angle).
inline constexpr std::array<RotatorSetting, 2> kAliceRotators{{
    {Path::upper, -std::numbers::pi / 4},
    {Path::lower, +std::numbers::pi / 4},
}};

// Bob's bit-0 rotators, the inverse of Alice's. Eve's "rotation" basis uses
// the same pair.
inline constexpr std::array<RotatorSetting, 2> kBobRotators{{
    {Path::upper, +std::numbers::pi / 4},
    {Path::lower, -std::numbers::pi / 4},
}};

/// Alice's bit is 0 for the unentangled states and 1 for the entangled ones.
enum class LegalState : int {
  unentangled_top = 0,
  unentangled_bottom = 1,
  entangled_top = 2,
  entangled_bottom = 3,
};

constexpr LegalState legal_state(SourcePort source, int bit) {
  const bool top = source == SourcePort::S1_top;
  if (bit == 0) return top ? LegalState::unentangled_top : LegalState::unentangled_bottom;
  return top ? LegalState::entangled_top : LegalState::entangled_bottom;
}

constexpr SourcePort source_of(LegalState s) {
  return (s == LegalState::unentangled_top || s == LegalState::entangled_top)
             ? SourcePort::S1_top
             : SourcePort::S2_bottom;
}

constexpr int bit_of(LegalState s) {
  return (s == LegalState::entangled_top || s == LegalState::entangled_bottom) ? 1 : 0;
}

inline std::string_view to_string(LegalState s) {
  switch (s) {
    case LegalState::unentangled_top: return "unentangled_top";
    case LegalState::unentangled_bottom: return "unentangled_bottom";
    case LegalState::entangled_top: return "entangled_top";
    case LegalState::entangled_bottom: return "entangled_bottom";
  }
  return "?";
}

inline std::optional<LegalState> parse_legal_state(std::string_view text) {
  for (int i = 0; i < 4; ++i) {
    const auto s = static_cast<LegalState>(i);
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

/// S1 injects |0>|+45>, S2 injects |1>|+45>; Alice's beam splitter; then her
/// rotators when bit = 1.
inline PureState alice_prepare(SourcePort source, int bit) {
  const PureState injected = source == SourcePort::S1_top
                                 ? PureState::product(1.0, 0.0, kPolPlus45)
                                 : PureState::product(0.0, 1.0, kPolPlus45);
  const PureState split = apply_beam_splitter(injected);
  return bit == 1 ? apply_rotators(split, kAliceRotators) : split;
}

inline PureState prepare(LegalState s) { return alice_prepare(source_of(s), bit_of(s)); }

/// Bob's pre-beam-splitter setting: rotators on for bit 0, off for bit 1.
inline PureState apply_bob_setting(const PureState& state, int bob_bit) {
  return bob_bit == 0 ? apply_rotators(state, kBobRotators) : state;
}

}  // namespace qerasure
