#pragma once

// Per-round records of the erasure protocol, Bob's measurement, sifting on
// the public (source, detector) announcements, and the +/-45 check statistic.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qerasure/adversary.hpp"
#include "qerasure/bits.hpp"
#include "qerasure/encoding.hpp"
#include "qerasure/quantum_core.hpp"

namespace qerasure {

/// Ground truth of one round. `detector` is empty when nothing clicked (only
/// possible with blinded detectors); `pol_tag` is set only in check mode.
struct ProtocolRecord {
  std::uint64_t round_id = 0;
  SourcePort source = SourcePort::S1_top;
  int alice_bit = 0;
  int bob_bit = 0;
  std::optional<Detector> detector;
  std::optional<PolTag> pol_tag;
  bool kept = false;
  bool sampled = false;
  std::optional<EveOutcome> eve;

  friend bool operator==(const ProtocolRecord&, const ProtocolRecord&) = default;
};

/// The keep rule: S1 photons are kept on D1, S2 photons on D2.
constexpr bool should_keep(SourcePort source, std::optional<Detector> detector) {
  return detector.has_value() && *detector == keep_detector(source);
}

/// Bit strings at each stage of the pipeline. Stages that were not reached
/// stay empty.
struct KeyMaterial {
  Bits raw_alice;
  Bits raw_bob;
  Bits sifted_alice;
  Bits sifted_bob;
  std::vector<std::size_t> sample_indices;  // positions in the sifted strings
  Bits remaining_alice;                     // sifted minus sample
  Bits remaining_bob;
  Bits corrected_bob;
  Bits final_alice;
  Bits final_bob;
};

/// Bob's rotators go in for bit 0; then his beam splitter and detectors.
template <typename Engine>
Detection bob_measure(const PureState& state, int bit, bool check_mode, Engine& rng) {
  return sample_detection(apply_bob_setting(state, bit), rng, check_mode);
}

/// Sets `kept` on every record from its announcements and builds both
/// parties' sifted strings, each from that party's own bits.
inline KeyMaterial sift(std::span<ProtocolRecord> records) {
  KeyMaterial keys;
  keys.raw_alice.reserve(records.size());
  keys.raw_bob.reserve(records.size());
  for (auto& r : records) {
    keys.raw_alice.push_back(static_cast<std::uint8_t>(r.alice_bit));
    keys.raw_bob.push_back(static_cast<std::uint8_t>(r.bob_bit));
    r.kept = should_keep(r.source, r.detector);
    if (r.kept) {
      keys.sifted_alice.push_back(static_cast<std::uint8_t>(r.alice_bit));
      keys.sifted_bob.push_back(static_cast<std::uint8_t>(r.bob_bit));
    }
  }
  return keys;
}

/// Among rounds where the bits disagree and a detector fired, the fraction
/// Bob saw at -45. Empty when no round qualifies.
inline std::optional<double> interference_alarm_rate(std::span<const ProtocolRecord> records) {
  std::size_t qualifying = 0;
  std::size_t alarms = 0;
  for (const auto& r : records) {
    if (r.alice_bit == r.bob_bit || !r.detector || !r.pol_tag) continue;
    ++qualifying;
    if (*r.pol_tag == PolTag::minus45) ++alarms;
  }
  if (qualifying == 0) return std::nullopt;
  return static_cast<double>(alarms) / static_cast<double>(qualifying);
}

}  // namespace qerasure
