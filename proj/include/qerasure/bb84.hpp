#pragma once

// Polarization BB84 on the photon model of quantum_core (path fixed to the
// upper arm), with the same attack menu as the erasure protocol.

#include <array>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include "qerasure/session.hpp"

namespace qerasure {

enum class Bb84Basis : int { rectilinear = 0, diagonal = 1 };

inline std::string_view to_string(Bb84Basis b) { return b == Bb84Basis::rectilinear ? "rect" : "diag"; }
inline std::optional<Bb84Basis> parse_bb84_basis(std::string_view s) {
  if (s == "rect") return Bb84Basis::rectilinear;
  if (s == "diag") return Bb84Basis::diagonal;
  return std::nullopt;
}

struct Bb84EveOutcome {
  Bb84Basis basis = Bb84Basis::rectilinear;
  int bit = 0;

  friend bool operator==(const Bb84EveOutcome&, const Bb84EveOutcome&) = default;
};

/// `bob_bit` is empty when no detector clicked (blinded, mismatched basis).
struct Bb84Record {
  std::uint64_t round_id = 0;
  Bb84Basis alice_basis = Bb84Basis::rectilinear;
  int alice_bit = 0;
  Bb84Basis bob_basis = Bb84Basis::rectilinear;
  std::optional<int> bob_bit;
  bool kept = false;
  bool sampled = false;
  std::optional<Bb84EveOutcome> eve;

  friend bool operator==(const Bb84Record&, const Bb84Record&) = default;
};

/// H/V for the rectilinear basis, +45/-45 for the diagonal one.
inline PureState bb84_prepare(Bb84Basis basis, int bit) {
  const PolarizationVector& pol = basis == Bb84Basis::rectilinear ? (bit ? kPolV : kPolH)
                                                                   : (bit ? kPolMinus45 : kPolPlus45);
  return PureState::product(1.0, 0.0, pol);
}

/// Probability (or intensity fraction) of outcome 0 when analyzing in
/// `basis`: a -45 degree rotator maps the diagonal basis onto H/V, then a
/// polarizing splitter sends H to detector 0.
inline double bb84_zero_fraction(const PureState& state, Bb84Basis basis) {
  const PureState field = basis == Bb84Basis::diagonal
                              ? apply_rotators(state, {RotatorSetting{Path::upper, -std::numbers::pi / 4}})
                              : state;
  return detail::snap_probability(std::norm(field.amplitude(Path::upper, Polarization::H)) +
                                  std::norm(field.amplitude(Path::lower, Polarization::H)));
}

template <typename Engine>
int bb84_measure(const PureState& state, Bb84Basis basis, Engine& rng) {
  return uniform01(rng) < bb84_zero_fraction(state, basis) ? 0 : 1;
}

/// Threshold detectors facing Eve's faked state: full intensity on one
/// detector when Bob's basis matches the pulse's, half-half otherwise.
inline std::optional<int> bb84_blinded_response(const PureState& pulse, Bb84Basis bob_basis,
                                                const BlindedDetectorModel& model) {
  const double f0 = bb84_zero_fraction(pulse, bob_basis);
  if (model.clicks(f0)) return 0;
  if (model.clicks(1.0 - f0)) return 1;
  return std::nullopt;
}

struct Bb84Result {
  std::vector<Bb84Record> records;
  KeyMaterial keys;
  SessionStats stats;
};

/// Eve's outcome table from a transcript. Intercept-resend: rounds with a
/// rectilinear Alice basis, outcomes (eve basis, eve bit). Blinding: kept
/// rounds, outcome = Eve's bit.
inline ProbabilityTable bb84_empirical_table(std::span<const Bb84Record> records, Attack attack) {
  if (attack == Attack::blinding) {
    std::array<std::vector<std::size_t>, 2> counts{std::vector<std::size_t>(2, 0), std::vector<std::size_t>(2, 0)};
    for (const auto& r : records) {
      if (r.kept && r.eve) ++counts[r.alice_bit][static_cast<std::size_t>(r.eve->bit)];
    }
    return ProbabilityTable::from_counts(counts, {"0", "1"});
  }
  std::array<std::vector<std::size_t>, 2> counts{std::vector<std::size_t>(4, 0), std::vector<std::size_t>(4, 0)};
  for (const auto& r : records) {
    if (!r.eve || r.alice_basis != Bb84Basis::rectilinear) continue;
    ++counts[r.alice_bit][static_cast<std::size_t>(r.eve->basis) * 2 + static_cast<std::size_t>(r.eve->bit)];
  }
  return ProbabilityTable::from_counts(counts, {"rect:0", "rect:1", "diag:0", "diag:1"});
}

inline Bb84Result summarize_bb84(std::vector<Bb84Record> records, const SessionConfig& config) {
  Bb84Result out;
  SessionStats& st = out.stats;
  KeyMaterial& keys = out.keys;
  st.protocol = ProtocolKind::bb84;
  st.attack = config.attack;
  st.rounds = records.size();

  std::size_t eve_kept = 0;
  std::size_t eve_agree = 0;
  for (const auto& r : records) {
    keys.raw_alice.push_back(static_cast<std::uint8_t>(r.alice_bit));
    keys.raw_bob.push_back(static_cast<std::uint8_t>(r.bob_bit.value_or(0)));
    if (r.bob_bit) ++st.detected;
    if (!r.kept) continue;
    if (r.sampled) keys.sample_indices.push_back(keys.sifted_alice.size());
    keys.sifted_alice.push_back(static_cast<std::uint8_t>(r.alice_bit));
    keys.sifted_bob.push_back(static_cast<std::uint8_t>(r.bob_bit.value_or(0)));
    if (r.eve) {
      ++eve_kept;
      eve_agree += r.eve->bit == r.alice_bit;
    }
  }
  st.keep_rate = st.rounds > 0 ? static_cast<double>(keys.sifted_alice.size()) / static_cast<double>(st.rounds) : 0.0;
  if (eve_kept > 0) st.eve_agreement = static_cast<double>(eve_agree) / static_cast<double>(eve_kept);
  if (config.attack != Attack::none) {
    try {
      st.i_alice_eve_empirical = mutual_information(bb84_empirical_table(records, config.attack));
    } catch (const InsufficientData&) {
    }
  }
  complete_keys(keys, st, config);
  out.records = std::move(records);
  return out;
}

inline std::vector<Bb84Record> simulate_bb84_rounds(const SessionConfig& config) {
  Rng rng = make_rng(config.seed, Stream::rounds);
  const BlindedDetectorModel model(config.blinding_threshold);
  std::vector<Bb84Record> records;
  records.reserve(config.rounds);
  for (std::uint64_t id = 0; id < config.rounds; ++id) {
    Bb84Record r;
    r.round_id = id;
    r.alice_basis = static_cast<Bb84Basis>(random_bit(rng));
    r.alice_bit = random_bit(rng);
    r.bob_basis = static_cast<Bb84Basis>(random_bit(rng));
    const PureState emitted = bb84_prepare(r.alice_basis, r.alice_bit);
    switch (config.attack) {
      case Attack::none:
        r.bob_bit = bb84_measure(emitted, r.bob_basis, rng);
        break;
      case Attack::intercept_resend: {
        Bb84EveOutcome e;
        e.basis = static_cast<Bb84Basis>(random_bit(rng));
        e.bit = bb84_measure(emitted, e.basis, rng);
        r.eve = e;
        r.bob_bit = bb84_measure(bb84_prepare(e.basis, e.bit), r.bob_basis, rng);
        break;
      }
      case Attack::blinding: {
        Bb84EveOutcome e;
        e.basis = static_cast<Bb84Basis>(random_bit(rng));
        e.bit = bb84_measure(emitted, e.basis, rng);
        r.eve = e;
        r.bob_bit = bb84_blinded_response(bb84_prepare(e.basis, e.bit), r.bob_basis, model);
        break;
      }
    }
    r.kept = r.bob_bit.has_value() && r.alice_basis == r.bob_basis;
    records.push_back(r);
  }
  return records;
}

/// Prepare-and-measure BB84 with basis sifting, then the same sample,
/// decision and post-processing as the erasure protocol.
inline Bb84Result bb84_run(const SessionConfig& config) {
  config.validate();
  if (config.protocol != ProtocolKind::bb84) throw ConfigError("bb84_run: protocol must be bb84");
  auto records = simulate_bb84_rounds(config);
  std::size_t kept = 0;
  for (const auto& r : records) kept += r.kept;
  mark_sample<Bb84Record>(records, select_sample(kept, config.sample_fraction, config.seed));
  return summarize_bb84(std::move(records), config);
}

/// bb84_run with the blinding attack forced on.
inline Bb84Result bb84_blinding(SessionConfig config) {
  config.protocol = ProtocolKind::bb84;
  config.attack = Attack::blinding;
  return bb84_run(config);
}

}  // namespace qerasure
