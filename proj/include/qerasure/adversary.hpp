#pragma once

// Eve: intercept-resend with a fixed outcome -> state rule, and the
// detector-blinding attack that reuses the same measurement but answers with
// a bright classical pulse aimed at Bob's threshold-mode detectors.

#include <array>
#include <cstddef>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qerasure/bits.hpp"
#include "qerasure/encoding.hpp"
#include "qerasure/quantum_core.hpp"

namespace qerasure {

enum class EveBasis : int { no_rotation = 0, rotation = 1 };
// upper is Eve's D1 analog, lower her D2 analog.
enum class EvePort : int { upper = 0, lower = 1 };

struct EveOutcome {
  EveBasis basis = EveBasis::no_rotation;
  EvePort port = EvePort::upper;

  friend bool operator==(const EveOutcome&, const EveOutcome&) = default;

  constexpr std::size_t index() const {
    return static_cast<std::size_t>(basis) * 2 + static_cast<std::size_t>(port);
  }

  /// Outcome label r: (no_rotation, lower) -> 0, (no_rotation, upper) -> 1,
  /// (rotation, upper) -> 0', (rotation, lower) -> 1'.
  /// Returned as 0..3 in the order 0, 1, 0', 1'.
  constexpr int label_index() const {
    if (basis == EveBasis::no_rotation) return port == EvePort::lower ? 0 : 1;
    return port == EvePort::upper ? 2 : 3;
  }
};

inline constexpr std::array<std::string_view, 4> kOutcomeLabels{"0", "1", "0'", "1'"};

inline std::string_view to_string(EveBasis b) {
  return b == EveBasis::no_rotation ? "no_rotation" : "rotation";
}
inline std::string_view to_string(EvePort p) { return p == EvePort::upper ? "upper" : "lower"; }

inline std::optional<EveBasis> parse_eve_basis(std::string_view s) {
  if (s == "no_rotation") return EveBasis::no_rotation;
  if (s == "rotation") return EveBasis::rotation;
  return std::nullopt;
}
inline std::optional<EvePort> parse_eve_port(std::string_view s) {
  if (s == "upper") return EvePort::upper;
  if (s == "lower") return EvePort::lower;
  return std::nullopt;
}

/// "basis:port", the form stored in transcripts.
inline std::string to_string(const EveOutcome& o) {
  return std::string(to_string(o.basis)) + ":" + std::string(to_string(o.port));
}

inline std::optional<EveOutcome> parse_eve_outcome(std::string_view s) {
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  const auto b = parse_eve_basis(s.substr(0, colon));
  const auto p = parse_eve_port(s.substr(colon + 1));
  if (!b || !p) return std::nullopt;
  return EveOutcome{*b, *p};
}

/// Same apparatus as Bob: optional rotators, beam splitter, two detectors.
/// Draws one bit for the basis and one uniform for the port.
template <typename Engine>
EveOutcome eve_measure(const PureState& state, Engine& rng) {
  EveOutcome out;
  out.basis = random_bit(rng) ? EveBasis::rotation : EveBasis::no_rotation;
  const PureState field =
      out.basis == EveBasis::rotation ? apply_rotators(state, kBobRotators) : state;
  const auto dist = detector_distribution(field);
  out.port = uniform01(rng) < dist.d1 ? EvePort::upper : EvePort::lower;
  return out;
}

/// Outcome -> legal state Eve forwards. Exactly four entries.
class ResendRule {
 public:
  using Table = std::array<LegalState, 4>;

  ResendRule() : table_(standard_table()) {}
  explicit ResendRule(const Table& table) : table_(table) {}

  /// The strategy whose error rate and information gain the analysis module
  /// reproduces: each outcome is answered with the state that produces it
  /// deterministically.
  static constexpr Table standard_table() {
    Table t{};
    t[EveOutcome{EveBasis::no_rotation, EvePort::lower}.index()] = LegalState::unentangled_top;
    t[EveOutcome{EveBasis::no_rotation, EvePort::upper}.index()] = LegalState::unentangled_bottom;
    t[EveOutcome{EveBasis::rotation, EvePort::lower}.index()] = LegalState::entangled_top;
    t[EveOutcome{EveBasis::rotation, EvePort::upper}.index()] = LegalState::entangled_bottom;
    return t;
  }

  LegalState operator()(const EveOutcome& o) const { return table_[o.index()]; }
  const Table& table() const { return table_; }

  friend bool operator==(const ResendRule&, const ResendRule&) = default;

  /// Delimited text: header `basis,port,state`, then one row per outcome.
  /// Lines starting with '#' are ignored. All four outcomes are required.
  static ResendRule parse(std::istream& in) {
    Table t{};
    std::array<bool, 4> seen{};
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      if (!header) {
        if (line != "basis,port,state") {
          throw std::runtime_error("resend rule line " + std::to_string(line_no) +
                                   ": expected header 'basis,port,state'");
        }
        header = true;
        continue;
      }
      std::array<std::string, 3> cols;
      std::stringstream ss(line);
      std::size_t n = 0;
      for (std::string cell; n < 3 && std::getline(ss, cell, ',');) cols[n++] = cell;
      std::string extra;
      const auto b = parse_eve_basis(cols[0]);
      const auto p = parse_eve_port(cols[1]);
      const auto s = parse_legal_state(cols[2]);
      if (n != 3 || std::getline(ss, extra, ',') || !b || !p || !s) {
        throw std::runtime_error("resend rule line " + std::to_string(line_no) + ": malformed row");
      }
      const auto idx = EveOutcome{*b, *p}.index();
      if (seen[idx]) {
        throw std::runtime_error("resend rule line " + std::to_string(line_no) + ": duplicate outcome");
      }
      seen[idx] = true;
      t[idx] = *s;
    }
    for (bool s : seen) {
      if (!s) throw std::runtime_error("resend rule: all four outcomes must be listed");
    }
    return ResendRule(t);
  }

  std::string serialize() const {
    std::string out = "basis,port,state\n";
    for (int b = 0; b < 2; ++b) {
      for (int p = 0; p < 2; ++p) {
        const EveOutcome o{static_cast<EveBasis>(b), static_cast<EvePort>(p)};
        out += std::string(to_string(o.basis)) + "," + std::string(to_string(o.port)) + "," +
               std::string(to_string((*this)(o))) + "\n";
      }
    }
    return out;
  }

 private:
  Table table_;
};

struct InterceptResult {
  EveOutcome outcome;
  PureState resent;
};

template <typename Engine>
InterceptResult intercept_resend(const PureState& state, Engine& rng,
                                 const ResendRule& rule = ResendRule()) {
  const EveOutcome outcome = eve_measure(state, rng);
  return {outcome, prepare(rule(outcome))};
}

/// Eve's best guess of Alice's bit for a measured outcome once the source is
/// public: the bit whose state from that source is likelier to give it.
inline int eve_bit_inference(const EveOutcome& outcome, SourcePort source) {
  double likelihood[2];
  for (int bit = 0; bit < 2; ++bit) {
    PureState field = alice_prepare(source, bit);
    if (outcome.basis == EveBasis::rotation) field = apply_rotators(field, kBobRotators);
    const auto dist = detector_distribution(field);
    likelihood[bit] = outcome.port == EvePort::upper ? dist.d1 : dist.d2;
  }
  return likelihood[1] > likelihood[0] ? 1 : 0;
}

/// Classical pulse: `mode` fixes how intensity is routed through Bob's
/// interferometer; intensity is normalized to 1.
struct BlindingPulse {
  PureState mode;
  double intensity = 1.0;
};

/// Eve's guess (bit g, source s) is the state her intercept-resend rule would
/// send. The pulse mode is chosen so that all intensity reaches the keep
/// detector of s when Bob's bit equals g, and splits evenly otherwise:
/// (0,top) -> entangled_bottom, (0,bottom) -> entangled_top,
/// (1,top) -> unentangled_bottom, (1,bottom) -> unentangled_top.
inline BlindingPulse eve_blinding_pulse(const EveOutcome& outcome) {
  const LegalState guess = ResendRule()(outcome);
  LegalState mode = LegalState::unentangled_top;
  switch (guess) {
    case LegalState::unentangled_top: mode = LegalState::entangled_bottom; break;
    case LegalState::unentangled_bottom: mode = LegalState::entangled_top; break;
    case LegalState::entangled_top: mode = LegalState::unentangled_bottom; break;
    case LegalState::entangled_bottom: mode = LegalState::unentangled_top; break;
  }
  return {prepare(mode), 1.0};
}

/// Blinded detectors act as classical threshold devices.
struct BlindedDetectorModel {
  double threshold = 0.9;

  BlindedDetectorModel() = default;
  explicit BlindedDetectorModel(double t) : threshold(t) {
    if (!(t > 0.5 && t <= 1.0)) {
      throw std::invalid_argument("blinding threshold must lie in (0.5, 1.0]");
    }
  }

  bool clicks(double fraction) const { return fraction >= threshold - kSnapTolerance; }
};

/// Fraction of the pulse intensity reaching D1 and D2 for Bob's setting.
inline DetectorDistribution routing_fractions(const BlindingPulse& pulse, int bob_bit) {
  return detector_distribution(apply_bob_setting(pulse.mode, bob_bit));
}

/// Which detector, if any, crosses the threshold. In check mode each port has
/// a +45 and a -45 detector behind the polarizing splitter and the threshold
/// applies to each of the four.
inline std::optional<Detection> blinded_response(const BlindingPulse& pulse, int bob_bit,
                                                 const BlindedDetectorModel& model,
                                                 bool check_mode = false) {
  const PureState field = apply_bob_setting(pulse.mode, bob_bit);
  if (!check_mode) {
    const auto f = detector_distribution(field);
    if (model.clicks(f.d1)) return Detection{Detector::D1, std::nullopt};
    if (model.clicks(f.d2)) return Detection{Detector::D2, std::nullopt};
    return std::nullopt;
  }
  const auto pp = port_polarization_distribution(field);
  for (int port = 0; port < 2; ++port) {
    for (int pol = 0; pol < 2; ++pol) {
      if (model.clicks(pp[port][pol])) {
        return Detection{static_cast<Detector>(port), static_cast<PolTag>(pol)};
      }
    }
  }
  return std::nullopt;
}

struct EveKeyEstimate {
  Bits eve_key;    // Eve's guess for each kept round
  Bits alice_key;  // Alice's bits on the same rounds
  std::optional<double> agreement;
};

/// Eve's guessed sifted key from her outcomes and the public announcements.
/// `Record` needs members `eve` (optional<EveOutcome>), `source`, `kept` and
/// `alice_bit`. Rounds without an Eve outcome are skipped; if none carry one
/// the estimate is empty.
template <typename Records>
EveKeyEstimate eve_key_estimate(const Records& records) {
  EveKeyEstimate est;
  std::size_t agree = 0;
  for (const auto& r : records) {
    if (!r.kept || !r.eve) continue;
    const int guess = eve_bit_inference(*r.eve, r.source);
    est.eve_key.push_back(static_cast<std::uint8_t>(guess));
    est.alice_key.push_back(static_cast<std::uint8_t>(r.alice_bit));
    if (guess == r.alice_bit) ++agree;
  }
  if (!est.eve_key.empty()) {
    est.agreement = static_cast<double>(agree) / static_cast<double>(est.eve_key.size());
  }
  return est;
}

}  // namespace qerasure
