#pragma once

// A full erasure-protocol session: rounds, sifting, Alice's sample, the
// proceed/abort decision and, on proceed, reconciliation and amplification.
//
// Everything reported in SessionStats is a function of the records plus the
// configuration (summarize()); run_session() only adds the simulation.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qerasure/adversary.hpp"
#include "qerasure/analysis.hpp"
#include "qerasure/postprocess.hpp"
#include "qerasure/protocol.hpp"
#include "qerasure/random.hpp"

namespace qerasure {

enum class ProtocolKind { erasure, bb84 };
enum class Attack { none, intercept_resend, blinding };

inline std::string_view to_string(ProtocolKind p) { return p == ProtocolKind::erasure ? "erasure" : "bb84"; }
inline std::string_view to_string(Attack a) {
  switch (a) {
    case Attack::none: return "none";
    case Attack::intercept_resend: return "intercept_resend";
    case Attack::blinding: return "blinding";
  }
  return "?";
}

inline std::optional<ProtocolKind> parse_protocol(std::string_view s) {
  if (s == "erasure") return ProtocolKind::erasure;
  if (s == "bb84") return ProtocolKind::bb84;
  return std::nullopt;
}
inline std::optional<Attack> parse_attack(std::string_view s) {
  if (s == "none") return Attack::none;
  if (s == "intercept_resend") return Attack::intercept_resend;
  if (s == "blinding") return Attack::blinding;
  return std::nullopt;
}

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SessionConfig {
  ProtocolKind protocol = ProtocolKind::erasure;
  std::uint64_t rounds = 100000;
  Attack attack = Attack::none;
  double blinding_threshold = 0.9;
  bool check_mode = false;
  double sample_fraction = 0.1;
  double qber_threshold = kDefaultQberThreshold;
  double info_threshold = kDefaultInfoThreshold;
  std::uint64_t seed = 1;
  /// Eve information charged during amplification; protocol default if unset.
  std::optional<double> eve_info_rate;
  std::size_t safety_bits = 64;
  ResendRule resend_rule;

  void validate() const {
    if (rounds == 0) throw ConfigError("rounds must be at least 1");
    if (!(sample_fraction > 0.0 && sample_fraction < 1.0)) {
      throw ConfigError("sample_fraction must lie in (0, 1)");
    }
    if (!(blinding_threshold > 0.5 && blinding_threshold <= 1.0)) {
      throw ConfigError("blinding_threshold must lie in (0.5, 1]");
    }
    if (!(qber_threshold > 0.0 && qber_threshold <= 1.0)) {
      throw ConfigError("qber_threshold must lie in (0, 1]");
    }
    if (!(info_threshold >= 0.0 && info_threshold <= 1.0)) {
      throw ConfigError("info_threshold must lie in [0, 1]");
    }
    if (eve_info_rate && !(*eve_info_rate >= 0.0 && *eve_info_rate <= 1.0)) {
      throw ConfigError("eve_info_rate must lie in [0, 1]");
    }
  }
};

/// Eve's information per sifted bit for the analyzed intercept strategy of
/// each protocol. Alice and Bob cannot tell which attack (if any) ran, so
/// this is what amplification charges unless overridden.
inline double default_eve_info_rate(ProtocolKind protocol) {
  return protocol == ProtocolKind::erasure ? mutual_information(erasure_intercept_table())
                                           : mutual_information(bb84_intercept_table());
}

/// Analytic I(alice, eve) for the configured attack.
inline double analytic_eve_information(ProtocolKind protocol, Attack attack) {
  if (attack == Attack::none) return 0.0;
  if (protocol == ProtocolKind::erasure) return mutual_information(erasure_intercept_table());
  return attack == Attack::intercept_resend ? mutual_information(bb84_intercept_table())
                                            : mutual_information(bb84_blinding_table());
}

enum class PostprocessStatus { skipped, ok, reconciliation_failed, key_exhausted };

inline std::string_view to_string(PostprocessStatus s) {
  switch (s) {
    case PostprocessStatus::skipped: return "skipped";
    case PostprocessStatus::ok: return "ok";
    case PostprocessStatus::reconciliation_failed: return "reconciliation_failed";
    case PostprocessStatus::key_exhausted: return "key_exhausted";
  }
  return "?";
}

struct SessionStats {
  ProtocolKind protocol = ProtocolKind::erasure;
  Attack attack = Attack::none;
  std::size_t rounds = 0;
  std::size_t detected = 0;  // rounds where some detector clicked
  std::size_t kept = 0;
  double keep_rate = 0.0;
  std::size_t sifted_errors = 0;
  std::optional<double> sifted_qber;
  std::size_t double_clicks = 0;

  std::size_t sample_size = 0;
  std::size_t sample_errors = 0;
  std::optional<double> sample_qber;
  double i_alice_bob = 0.0;
  double i_alice_eve = 0.0;  // analytic, for the configured attack
  std::optional<double> i_alice_eve_empirical;
  std::optional<std::array<double, 4>> eve_p_r;  // erasure, top-source rounds
  std::optional<double> eve_agreement;
  std::optional<double> alarm_rate;
  Verdict verdict = Verdict::abort;

  PostprocessStatus postprocess = PostprocessStatus::skipped;
  std::size_t reconciled_length = 0;
  std::size_t parity_bits_leaked = 0;
  std::size_t bisections = 0;
  std::size_t reconcile_passes = 0;
  double eve_info_charged = 0.0;
  long long final_key_length = 0;
  bool final_keys_match = false;

  /// Verdict proceed and a usable final key.
  bool succeeded() const { return verdict == Verdict::proceed && postprocess == PostprocessStatus::ok; }
};

/// Alice's public sample: round(fraction * n) distinct sifted positions
/// (at least one when n > 0), ascending.
inline std::vector<std::size_t> select_sample(std::size_t n, double fraction, std::uint64_t seed) {
  if (n == 0) return {};
  auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n);
  Rng rng = make_rng(seed, Stream::sample);
  auto perm = random_permutation(n, rng);
  perm.resize(k);
  std::sort(perm.begin(), perm.end());
  return perm;
}

/// Sample estimate, verdict, and (on proceed) reconciliation plus
/// amplification. Expects keys.sifted_* and keys.sample_indices filled.
inline void complete_keys(KeyMaterial& keys, SessionStats& stats, const SessionConfig& config) {
  const std::size_t n = keys.sifted_alice.size();
  stats.kept = n;
  stats.sifted_errors = count_differences(keys.sifted_alice, keys.sifted_bob);
  stats.sifted_qber = n > 0 ? std::optional<double>(qber(stats.sifted_errors, n)) : std::nullopt;

  std::vector<bool> in_sample(n, false);
  for (auto i : keys.sample_indices) {
    if (i >= n || in_sample[i]) throw std::invalid_argument("sample indices must be distinct sifted positions");
    in_sample[i] = true;
    stats.sample_errors += keys.sifted_alice[i] != keys.sifted_bob[i];
  }
  stats.sample_size = keys.sample_indices.size();
  keys.remaining_alice.clear();
  keys.remaining_bob.clear();
  for (std::size_t i = 0; i < n; ++i) {
    if (in_sample[i]) continue;
    keys.remaining_alice.push_back(keys.sifted_alice[i]);
    keys.remaining_bob.push_back(keys.sifted_bob[i]);
  }

  stats.i_alice_eve = analytic_eve_information(config.protocol, config.attack);
  if (stats.sample_size == 0) {
    stats.verdict = Verdict::abort;
    return;
  }
  stats.sample_qber = qber(stats.sample_errors, stats.sample_size);
  stats.i_alice_bob = i_alice_bob(*stats.sample_qber);
  InfoMetrics metrics{stats.i_alice_eve, stats.i_alice_bob, *stats.sample_qber, Verdict::abort};
  stats.verdict = decide(metrics, config.qber_threshold, config.info_threshold);
  if (stats.verdict != Verdict::proceed) return;

  Rng rng = make_rng(config.seed, Stream::reconcile);
  ReconcileOptions options;
  options.qber_estimate = *stats.sample_qber;
  const auto rec = reconcile(keys.remaining_alice, keys.remaining_bob, rng, options);
  keys.corrected_bob = rec.corrected_key;
  stats.reconciled_length = keys.remaining_alice.size();
  stats.parity_bits_leaked = rec.parity_bits_leaked;
  stats.bisections = rec.rounds_of_bisection;
  stats.reconcile_passes = rec.passes;
  if (!rec.success) {
    stats.postprocess = PostprocessStatus::reconciliation_failed;
    return;
  }

  stats.eve_info_charged = config.eve_info_rate.value_or(default_eve_info_rate(config.protocol));
  stats.final_key_length = amplified_length(keys.remaining_alice.size(), rec.parity_bits_leaked,
                                            stats.eve_info_charged, config.safety_bits);
  const auto fa = privacy_amplify(keys.remaining_alice, rec.parity_bits_leaked, stats.eve_info_charged,
                                  config.safety_bits, config.seed);
  const auto fb = privacy_amplify(keys.corrected_bob, rec.parity_bits_leaked, stats.eve_info_charged,
                                  config.safety_bits, config.seed);
  if (fa.aborted) {
    stats.postprocess = PostprocessStatus::key_exhausted;
    return;
  }
  keys.final_alice = fa.key;
  keys.final_bob = fb.key;
  stats.final_keys_match = keys.final_alice == keys.final_bob;
  stats.postprocess = PostprocessStatus::ok;
}

/// Sets `sampled` on the kept records at the given sifted positions.
template <typename Record>
void mark_sample(std::span<Record> records, const std::vector<std::size_t>& sample) {
  std::size_t pos = 0;
  std::size_t next = 0;
  for (auto& r : records) {
    r.sampled = false;
    if (!r.kept) continue;
    if (next < sample.size() && sample[next] == pos) {
      r.sampled = true;
      ++next;
    }
    ++pos;
  }
}

struct SessionResult {
  std::vector<ProtocolRecord> records;
  KeyMaterial keys;
  SessionStats stats;
};

/// Recomputes every statistic from the records alone (kept and sampled flags
/// are taken as recorded).
inline SessionResult summarize(std::vector<ProtocolRecord> records, const SessionConfig& config) {
  SessionResult out;
  SessionStats& st = out.stats;
  KeyMaterial& keys = out.keys;
  st.protocol = ProtocolKind::erasure;
  st.attack = config.attack;
  st.rounds = records.size();

  const BlindedDetectorModel model(config.blinding_threshold);
  for (const auto& r : records) {
    keys.raw_alice.push_back(static_cast<std::uint8_t>(r.alice_bit));
    keys.raw_bob.push_back(static_cast<std::uint8_t>(r.bob_bit));
    if (r.detector) ++st.detected;
    if (r.kept) {
      if (r.sampled) keys.sample_indices.push_back(keys.sifted_alice.size());
      keys.sifted_alice.push_back(static_cast<std::uint8_t>(r.alice_bit));
      keys.sifted_bob.push_back(static_cast<std::uint8_t>(r.bob_bit));
    }
    if (config.attack == Attack::blinding && r.eve) {
      const auto f = routing_fractions(eve_blinding_pulse(*r.eve), r.bob_bit);
      if (model.clicks(f.d1) && model.clicks(f.d2)) ++st.double_clicks;
    }
  }
  st.keep_rate = st.rounds > 0 ? static_cast<double>(keys.sifted_alice.size()) / static_cast<double>(st.rounds) : 0.0;

  const auto est = eve_key_estimate(records);
  st.eve_agreement = est.agreement;
  try {
    const auto table = empirical_probability_table(records);
    st.i_alice_eve_empirical = mutual_information(table);
    st.eve_p_r = std::array<double, 4>{table.p_r(0), table.p_r(1), table.p_r(2), table.p_r(3)};
  } catch (const InsufficientData&) {
  }
  if (config.check_mode) st.alarm_rate = interference_alarm_rate(records);

  complete_keys(keys, st, config);
  out.records = std::move(records);
  return out;
}

/// Simulates the rounds only. Per round the stream supplies, in order:
/// source, Alice's bit, Bob's bit, Eve's draws (if any), Bob's detection.
inline std::vector<ProtocolRecord> simulate_rounds(const SessionConfig& config) {
  Rng rng = make_rng(config.seed, Stream::rounds);
  const BlindedDetectorModel model(config.blinding_threshold);
  std::vector<ProtocolRecord> records;
  records.reserve(config.rounds);
  for (std::uint64_t id = 0; id < config.rounds; ++id) {
    ProtocolRecord r;
    r.round_id = id;
    r.source = random_bit(rng) ? SourcePort::S2_bottom : SourcePort::S1_top;
    r.alice_bit = random_bit(rng);
    r.bob_bit = random_bit(rng);
    const PureState emitted = alice_prepare(r.source, r.alice_bit);
    std::optional<Detection> det;
    switch (config.attack) {
      case Attack::none:
        det = bob_measure(emitted, r.bob_bit, config.check_mode, rng);
        break;
      case Attack::intercept_resend: {
        const auto ir = intercept_resend(emitted, rng, config.resend_rule);
        r.eve = ir.outcome;
        det = bob_measure(ir.resent, r.bob_bit, config.check_mode, rng);
        break;
      }
      case Attack::blinding: {
        r.eve = eve_measure(emitted, rng);
        det = blinded_response(eve_blinding_pulse(*r.eve), r.bob_bit, model, config.check_mode);
        break;
      }
    }
    if (det) {
      r.detector = det->detector;
      r.pol_tag = det->pol;
    }
    records.push_back(r);
  }
  return records;
}

/// Steps 1-6 end to end, then post-processing on proceed. Deterministic in
/// the configuration (seed included).
inline SessionResult run_session(const SessionConfig& config) {
  config.validate();
  if (config.protocol != ProtocolKind::erasure) throw ConfigError("run_session: protocol must be erasure");
  auto records = simulate_rounds(config);
  const auto keys = sift(records);
  mark_sample<ProtocolRecord>(records, select_sample(keys.sifted_alice.size(), config.sample_fraction, config.seed));
  return summarize(std::move(records), config);
}

}  // namespace qerasure
