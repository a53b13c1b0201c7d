#pragma once

// Text artifacts: flat key=value configuration, versioned transcripts
// (comment preamble + delimited rows), key=value summaries, and the
// side-by-side comparison table.
//
// Transcript v1 layout:
//   # qerasure-transcript v1
//   # <config key>=<value>        (one per line, see transcript_config)
//   <header row>
//   <one row per round>

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "qerasure/experiment.hpp"

namespace qerasure {

inline constexpr std::string_view kTranscriptMagic = "# qerasure-transcript v1";
inline constexpr std::string_view kSummaryFormat = "qerasure-summary/1";
inline constexpr std::string_view kErasureHeader =
    "round_id,source,alice_bit,bob_bit,detector,pol_tag,kept,sampled,eve";
inline constexpr std::string_view kBb84Header =
    "round_id,alice_basis,alice_bit,bob_basis,bob_bit,kept,sampled,eve";

/// Malformed input, with the 1-based line it was found on (0 if none).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed transcript whose rows violate a protocol invariant.
class ConsistencyError : public std::runtime_error {
 public:
  ConsistencyError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::string fmt_double(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline std::string fmt_exact(double v) { return fmt_double(v, "%.17g"); }

inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_double(*v) : "na"; }

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + v + "'");
  }
}

inline std::uint64_t parse_u64(std::string_view key, const std::string& v) {
  try {
    if (v.empty() || v[0] == '-') throw std::invalid_argument("negative");
    std::size_t used = 0;
    const auto d = std::stoull(v, &used, 0);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + v + "'");
  }
}

inline bool parse_flag(std::string_view key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError(std::string(key) + ": expected a boolean, got '" + v + "'");
}

}  // namespace detail

/// Reads `key=value` lines; blank lines and '#' comments are skipped.
inline KeyValues parse_key_values(std::istream& in) {
  KeyValues out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) throw ParseError(line_no, "expected key=value");
    out.emplace_back(detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }
  return out;
}

/// A session configuration plus where its artifacts go.
struct ExperimentConfig {
  SessionConfig session;
  std::string transcript_path;
  std::string summary_path;
  std::string keys_path;
  std::string resend_rules_path;
};

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "protocol",     "rounds",        "attack",      "blinding_threshold", "check_mode",
      "sample_fraction", "qber_threshold", "info_threshold", "seed",       "eve_info_rate",
      "safety_bits",  "resend_rules",  "transcript",  "summary",            "keys"};
  return keys;
}

inline ResendRule load_resend_rule(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("resend_rules: cannot open '" + path + "'");
  try {
    return ResendRule::parse(in);
  } catch (const std::runtime_error& e) {
    throw ConfigError(std::string("resend_rules: ") + e.what());
  }
}

/// Applies one setting; unknown keys and bad values throw ConfigError.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  SessionConfig& s = cfg.session;
  if (key == "protocol") {
    const auto p = parse_protocol(value);
    if (!p) throw ConfigError("protocol: expected erasure or bb84, got '" + value + "'");
    s.protocol = *p;
  } else if (key == "rounds") {
    s.rounds = detail::parse_u64(key, value);
  } else if (key == "attack") {
    const auto a = parse_attack(value);
    if (!a) throw ConfigError("attack: expected none, intercept_resend or blinding, got '" + value + "'");
    s.attack = *a;
  } else if (key == "blinding_threshold") {
    s.blinding_threshold = detail::parse_double(key, value);
  } else if (key == "check_mode") {
    s.check_mode = detail::parse_flag(key, value);
  } else if (key == "sample_fraction") {
    s.sample_fraction = detail::parse_double(key, value);
  } else if (key == "qber_threshold") {
    s.qber_threshold = detail::parse_double(key, value);
  } else if (key == "info_threshold") {
    s.info_threshold = detail::parse_double(key, value);
  } else if (key == "seed") {
    s.seed = detail::parse_u64(key, value);
  } else if (key == "eve_info_rate") {
    if (value == "default") s.eve_info_rate.reset();
    else s.eve_info_rate = detail::parse_double(key, value);
  } else if (key == "safety_bits") {
    s.safety_bits = detail::parse_u64(key, value);
  } else if (key == "resend_rules") {
    cfg.resend_rules_path = value;
    s.resend_rule = value.empty() ? ResendRule() : load_resend_rule(value);
  } else if (key == "transcript") {
    cfg.transcript_path = value;
  } else if (key == "summary") {
    cfg.summary_path = value;
  } else if (key == "keys") {
    cfg.keys_path = value;
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

inline void apply_settings(ExperimentConfig& cfg, const KeyValues& kv) {
  for (const auto& [k, v] : kv) apply_setting(cfg, k, v);
}

// ---------------------------------------------------------------- transcripts

inline KeyValues transcript_config(const SessionConfig& c) {
  return {{"protocol", std::string(to_string(c.protocol))},
          {"attack", std::string(to_string(c.attack))},
          {"rounds", std::to_string(c.rounds)},
          {"seed", std::to_string(c.seed)},
          {"check_mode", c.check_mode ? "1" : "0"},
          {"sample_fraction", detail::fmt_exact(c.sample_fraction)},
          {"qber_threshold", detail::fmt_exact(c.qber_threshold)},
          {"info_threshold", detail::fmt_exact(c.info_threshold)},
          {"blinding_threshold", detail::fmt_exact(c.blinding_threshold)},
          {"eve_info_rate", c.eve_info_rate ? detail::fmt_exact(*c.eve_info_rate) : "default"},
          {"safety_bits", std::to_string(c.safety_bits)}};
}

inline void write_row(std::ostream& out, const ProtocolRecord& r) {
  out << r.round_id << ',' << (r.source == SourcePort::S1_top ? "S1" : "S2") << ',' << r.alice_bit << ','
      << r.bob_bit << ',' << (r.detector ? (*r.detector == Detector::D1 ? "D1" : "D2") : "none") << ','
      << (r.pol_tag ? (*r.pol_tag == PolTag::plus45 ? "+45" : "-45") : "-") << ',' << (r.kept ? 1 : 0) << ','
      << (r.sampled ? 1 : 0) << ',' << (r.eve ? to_string(*r.eve) : std::string("-")) << '\n';
}

inline void write_row(std::ostream& out, const Bb84Record& r) {
  out << r.round_id << ',' << to_string(r.alice_basis) << ',' << r.alice_bit << ',' << to_string(r.bob_basis)
      << ',' << (r.bob_bit ? std::to_string(*r.bob_bit) : std::string("-")) << ',' << (r.kept ? 1 : 0) << ','
      << (r.sampled ? 1 : 0) << ','
      << (r.eve ? std::string(to_string(r.eve->basis)) + ":" + std::to_string(r.eve->bit) : std::string("-"))
      << '\n';
}

inline void write_transcript(std::ostream& out, const SessionConfig& config, const Records& records) {
  out << kTranscriptMagic << '\n';
  for (const auto& [k, v] : transcript_config(config)) out << "# " << k << '=' << v << '\n';
  std::visit(
      [&](const auto& rows) {
        using Row = typename std::decay_t<decltype(rows)>::value_type;
        out << (std::is_same_v<Row, ProtocolRecord> ? kErasureHeader : kBb84Header) << '\n';
        for (const auto& r : rows) write_row(out, r);
      },
      records);
}

inline std::string transcript_text(const SessionConfig& config, const Records& records) {
  std::ostringstream out;
  write_transcript(out, config, records);
  return out.str();
}

struct Transcript {
  SessionConfig config;
  Records records;
  std::vector<std::size_t> lines;  // source line of each record
};

namespace detail {

inline int parse_bit(std::size_t line, const std::string& field, const std::string& v) {
  if (v == "0") return 0;
  if (v == "1") return 1;
  throw ParseError(line, field + ": expected 0 or 1, got '" + v + "'");
}

inline ProtocolRecord parse_erasure_row(std::size_t line, const std::vector<std::string>& c) {
  if (c.size() != 9) throw ParseError(line, "expected 9 fields, got " + std::to_string(c.size()));
  ProtocolRecord r;
  try {
    r.round_id = parse_u64("round_id", c[0]);
  } catch (const ConfigError& e) {
    throw ParseError(line, e.what());
  }
  if (c[1] == "S1") r.source = SourcePort::S1_top;
  else if (c[1] == "S2") r.source = SourcePort::S2_bottom;
  else throw ParseError(line, "source: expected S1 or S2, got '" + c[1] + "'");
  r.alice_bit = parse_bit(line, "alice_bit", c[2]);
  r.bob_bit = parse_bit(line, "bob_bit", c[3]);
  if (c[4] == "D1") r.detector = Detector::D1;
  else if (c[4] == "D2") r.detector = Detector::D2;
  else if (c[4] != "none") throw ParseError(line, "detector: expected D1, D2 or none, got '" + c[4] + "'");
  if (c[5] == "+45") r.pol_tag = PolTag::plus45;
  else if (c[5] == "-45") r.pol_tag = PolTag::minus45;
  else if (c[5] != "-") throw ParseError(line, "pol_tag: expected +45, -45 or -, got '" + c[5] + "'");
  r.kept = parse_bit(line, "kept", c[6]) == 1;
  r.sampled = parse_bit(line, "sampled", c[7]) == 1;
  if (c[8] != "-") {
    r.eve = parse_eve_outcome(c[8]);
    if (!r.eve) throw ParseError(line, "eve: malformed outcome '" + c[8] + "'");
  }
  return r;
}

inline Bb84Record parse_bb84_row(std::size_t line, const std::vector<std::string>& c) {
  if (c.size() != 8) throw ParseError(line, "expected 8 fields, got " + std::to_string(c.size()));
  Bb84Record r;
  try {
    r.round_id = parse_u64("round_id", c[0]);
  } catch (const ConfigError& e) {
    throw ParseError(line, e.what());
  }
  const auto ab = parse_bb84_basis(c[1]);
  const auto bb = parse_bb84_basis(c[3]);
  if (!ab || !bb) throw ParseError(line, "basis: expected rect or diag");
  r.alice_basis = *ab;
  r.bob_basis = *bb;
  r.alice_bit = parse_bit(line, "alice_bit", c[2]);
  if (c[4] != "-") r.bob_bit = parse_bit(line, "bob_bit", c[4]);
  r.kept = parse_bit(line, "kept", c[5]) == 1;
  r.sampled = parse_bit(line, "sampled", c[6]) == 1;
  if (c[7] != "-") {
    const auto colon = c[7].find(':');
    const auto basis = colon == std::string::npos ? std::nullopt : parse_bb84_basis(c[7].substr(0, colon));
    if (!basis) throw ParseError(line, "eve: malformed outcome '" + c[7] + "'");
    r.eve = Bb84EveOutcome{*basis, parse_bit(line, "eve bit", c[7].substr(colon + 1))};
  }
  return r;
}

}  // namespace detail

/// Parses a v1 transcript. Errors name the offending line; a file that ends
/// before the declared number of rounds is reported as truncated.
inline Transcript parse_transcript(std::istream& in) {
  Transcript t;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || detail::trim(line) != kTranscriptMagic) {
    throw ParseError(1, "not a qerasure v1 transcript");
  }
  ++line_no;
  ExperimentConfig cfg;
  bool have_rounds = false;
  std::optional<ProtocolKind> protocol;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind("# ", 0) != 0) {
      have_header = true;
      break;
    }
    const std::string body = line.substr(2);
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected '# key=value'");
    const std::string key = body.substr(0, eq);
    try {
      apply_setting(cfg, key, detail::trim(body.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ParseError(line_no, e.what());
    }
    if (key == "rounds") have_rounds = true;
    if (key == "protocol") protocol = cfg.session.protocol;
  }
  if (!have_rounds || !protocol) throw ParseError(line_no, "preamble must declare protocol and rounds");
  t.config = cfg.session;
  const std::string_view header = *protocol == ProtocolKind::erasure ? kErasureHeader : kBb84Header;
  if (!have_header) throw ParseError(line_no, "missing header row");
  if (detail::trim(line) != header) throw ParseError(line_no, "expected header '" + std::string(header) + "'");

  std::vector<ProtocolRecord> erasure;
  std::vector<Bb84Record> bb84;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw ParseError(line_no, "empty row");
    const auto cells = detail::split(line, ',');
    if (*protocol == ProtocolKind::erasure) erasure.push_back(detail::parse_erasure_row(line_no, cells));
    else bb84.push_back(detail::parse_bb84_row(line_no, cells));
    t.lines.push_back(line_no);
  }
  const std::size_t n = t.lines.size();
  if (n < t.config.rounds) {
    throw ParseError(line_no, "truncated transcript: declared " + std::to_string(t.config.rounds) +
                                  " rounds, found " + std::to_string(n));
  }
  if (n > t.config.rounds) {
    throw ParseError(t.lines[t.config.rounds], "more rows than the declared " + std::to_string(t.config.rounds) +
                                                   " rounds");
  }
  if (*protocol == ProtocolKind::erasure) t.records = std::move(erasure);
  else t.records = std::move(bb84);
  return t;
}

/// Checks every row against the protocol invariants (keep rule, check-mode
/// tags, sample within sifted, Eve annotations match the attack, ids).
inline void validate_transcript(const Transcript& t) {
  const auto& cfg = t.config;
  const bool eve_expected = cfg.attack != Attack::none;
  auto check = [&](bool ok, std::size_t i, const std::string& what) {
    if (!ok) throw ConsistencyError(t.lines[i], what);
  };
  if (const auto* rows = std::get_if<std::vector<ProtocolRecord>>(&t.records)) {
    for (std::size_t i = 0; i < rows->size(); ++i) {
      const auto& r = (*rows)[i];
      check(r.round_id == i, i, "round_id out of sequence");
      check(r.kept == should_keep(r.source, r.detector), i, "kept flag contradicts source/detector announcement");
      check(r.pol_tag.has_value() == (cfg.check_mode && r.detector.has_value()), i,
            "pol_tag presence contradicts check mode");
      check(!r.sampled || r.kept, i, "sampled round was not kept");
      check(r.eve.has_value() == eve_expected, i, "eve annotation contradicts attack setting");
      check(r.detector.has_value() || cfg.attack == Attack::blinding, i, "no-click round without blinding");
    }
  } else {
    const auto& b = std::get<std::vector<Bb84Record>>(t.records);
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto& r = b[i];
      check(r.round_id == i, i, "round_id out of sequence");
      check(r.kept == (r.bob_bit.has_value() && r.alice_basis == r.bob_basis), i,
            "kept flag contradicts basis announcement");
      check(!r.sampled || r.kept, i, "sampled round was not kept");
      check(r.eve.has_value() == eve_expected, i, "eve annotation contradicts attack setting");
      check(r.bob_bit.has_value() || cfg.attack == Attack::blinding, i, "no-click round without blinding");
    }
  }
}

// ------------------------------------------------------------------ summaries

inline KeyValues summary_fields(const SessionConfig& c, const SessionStats& s) {
  KeyValues kv{{"format", std::string(kSummaryFormat)}};
  for (auto& p : transcript_config(c)) kv.push_back(std::move(p));
  auto add = [&](std::string k, std::string v) { kv.emplace_back(std::move(k), std::move(v)); };
  add("detected", std::to_string(s.detected));
  add("kept", std::to_string(s.kept));
  add("keep_rate", detail::fmt_double(s.keep_rate));
  add("sifted_errors", std::to_string(s.sifted_errors));
  add("qber", detail::fmt_opt(s.sifted_qber));
  add("double_clicks", std::to_string(s.double_clicks));
  add("sample_size", std::to_string(s.sample_size));
  add("sample_errors", std::to_string(s.sample_errors));
  add("sample_qber", detail::fmt_opt(s.sample_qber));
  add("i_alice_bob", detail::fmt_double(s.i_alice_bob));
  add("i_alice_eve", detail::fmt_double(s.i_alice_eve));
  add("i_alice_eve_empirical", detail::fmt_opt(s.i_alice_eve_empirical));
  static const char* kPr[4] = {"eve_p_r_0", "eve_p_r_1", "eve_p_r_0p", "eve_p_r_1p"};
  for (int r = 0; r < 4; ++r) {
    add(kPr[r], s.eve_p_r ? detail::fmt_double((*s.eve_p_r)[r]) : "na");
  }
  add("eve_agreement", detail::fmt_opt(s.eve_agreement));
  add("alarm_rate", detail::fmt_opt(s.alarm_rate));
  add("verdict", std::string(to_string(s.verdict)));
  add("postprocess", std::string(to_string(s.postprocess)));
  add("reconciled_length", std::to_string(s.reconciled_length));
  add("parity_bits_leaked", std::to_string(s.parity_bits_leaked));
  add("bisections", std::to_string(s.bisections));
  add("reconcile_passes", std::to_string(s.reconcile_passes));
  add("eve_info_charged", detail::fmt_double(s.eve_info_charged));
  add("final_key_length", std::to_string(std::max<long long>(s.final_key_length, 0)));
  add("final_keys_match", s.final_keys_match ? "1" : "0");
  return kv;
}

inline std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

inline std::string summary_text(const SessionConfig& c, const SessionStats& s) {
  return format_key_values(summary_fields(c, s));
}

/// Keys whose values differ (or exist on one side only), in `expected` order.
inline std::vector<std::string> diff_key_values(const KeyValues& expected, const KeyValues& actual) {
  std::map<std::string, std::string> a(actual.begin(), actual.end());
  std::vector<std::string> out;
  for (const auto& [k, v] : expected) {
    const auto it = a.find(k);
    if (it == a.end() || it->second != v) out.push_back(k);
    if (it != a.end()) a.erase(it);
  }
  for (const auto& [k, v] : a) out.push_back(k);
  return out;
}

/// Replay: parse, validate, recompute.
inline ExperimentResult replay_transcript(std::istream& in) {
  Transcript t = parse_transcript(in);
  validate_transcript(t);
  return summarize_records(t.config, std::move(t.records));
}

/// Final keys: a length header, then each party's key as lowercase hex.
inline std::string key_file_text(const Bits& alice, const Bits& bob) {
  return "format=qerasure-keys/1\nlength=" + std::to_string(alice.size()) + "\nalice=" + to_hex(alice) +
         "\nbob=" + to_hex(bob) + "\n";
}

// ------------------------------------------------------------------ compare

inline std::string comparison_table(const std::string& name_a, const SessionStats& a, const std::string& name_b,
                                    const SessionStats& b) {
  struct Row {
    const char* label;
    std::string va;
    std::string vb;
  };
  auto attack = [](const SessionStats& s) {
    return std::string(to_string(s.protocol)) + "/" + std::string(to_string(s.attack));
  };
  const std::vector<Row> rows{
      {"run", attack(a), attack(b)},
      {"keep_rate", detail::fmt_double(a.keep_rate), detail::fmt_double(b.keep_rate)},
      {"qber", detail::fmt_opt(a.sifted_qber), detail::fmt_opt(b.sifted_qber)},
      {"sample_qber", detail::fmt_opt(a.sample_qber), detail::fmt_opt(b.sample_qber)},
      {"i_alice_eve", detail::fmt_double(a.i_alice_eve), detail::fmt_double(b.i_alice_eve)},
      {"i_alice_bob", detail::fmt_double(a.i_alice_bob), detail::fmt_double(b.i_alice_bob)},
      {"eve_agreement", detail::fmt_opt(a.eve_agreement), detail::fmt_opt(b.eve_agreement)},
      {"verdict", std::string(to_string(a.verdict)), std::string(to_string(b.verdict))},
  };
  std::size_t w0 = 6, w1 = name_a.size(), w2 = name_b.size();
  for (const auto& r : rows) {
    w0 = std::max(w0, std::string_view(r.label).size());
    w1 = std::max(w1, r.va.size());
    w2 = std::max(w2, r.vb.size());
  }
  auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };
  std::string out = pad("metric", w0) + "  " + pad(name_a, w1) + "  " + name_b + "\n";
  for (const auto& r : rows) out += pad(r.label, w0) + "  " + pad(r.va, w1) + "  " + r.vb + "\n";
  return out;
}

}  // namespace qerasure
