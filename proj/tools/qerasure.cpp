// qerasure: batch driver for erasure-QKD and BB84 sessions.
//
//   qerasure run     [--config FILE] [--<key> VALUE ...]
//   qerasure compare CONFIG_A CONFIG_B [--set K=V] [--set-a K=V] [--set-b K=V]
//   qerasure replay  TRANSCRIPT [--summary FILE]
//
// Settings are layered: defaults, then the config file, then QERASURE_<KEY>
// environment variables, then command-line flags.
//
// Exit status: 0 proceed (or consistent replay), 2 abort, 1 error.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qerasure/report.hpp"

namespace {

constexpr int kExitProceed = 0;
constexpr int kExitError = 1;
constexpr int kExitAbort = 2;

constexpr const char* kEnvPrefix = "QERASURE_";

using qerasure::ExperimentConfig;
using qerasure::KeyValues;

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qerasure::ConfigError("cannot open config file '" + path + "'");
  try {
    return qerasure::parse_key_values(in);
  } catch (const qerasure::ParseError& e) {
    throw qerasure::ConfigError(path + ": " + e.what());
  }
}

KeyValues environment_settings() {
  KeyValues kv;
  for (const auto& key : qerasure::config_keys()) {
    std::string name = kEnvPrefix;
    for (char c : key) name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (const char* v = std::getenv(name.c_str())) kv.emplace_back(key, v);
  }
  return kv;
}

std::pair<std::string, std::string> split_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw qerasure::ConfigError("expected KEY=VALUE, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

ExperimentConfig build_config(const std::string& file, const KeyValues& flags) {
  ExperimentConfig cfg;
  if (!file.empty()) qerasure::apply_settings(cfg, read_config_file(file));
  qerasure::apply_settings(cfg, environment_settings());
  qerasure::apply_settings(cfg, flags);
  cfg.session.validate();
  return cfg;
}

/// Writes every artifact to a temporary sibling first and renames only when
/// all writes succeeded, so a failed run leaves nothing behind.
class ArtifactWriter {
 public:
  void add(const std::string& path, std::string content) {
    if (!path.empty()) pending_.push_back({path, std::move(content)});
  }

  void commit() {
    std::vector<std::string> temps;
    try {
      for (const auto& [path, content] : pending_) {
        const std::string tmp = path + ".tmp";
        temps.push_back(tmp);
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        out.close();
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
      }
      for (std::size_t i = 0; i < pending_.size(); ++i) std::filesystem::rename(temps[i], pending_[i].path);
    } catch (...) {
      std::error_code ec;
      for (const auto& t : temps) std::filesystem::remove(t, ec);
      throw;
    }
  }

 private:
  struct Item {
    std::string path;
    std::string content;
  };
  std::vector<Item> pending_;
};

int cmd_run(const ExperimentConfig& cfg) {
  const auto result = qerasure::run_experiment(cfg.session);
  const std::string summary = qerasure::summary_text(cfg.session, result.stats);
  ArtifactWriter writer;
  if (!cfg.transcript_path.empty()) {
    writer.add(cfg.transcript_path, qerasure::transcript_text(cfg.session, result.records));
  }
  writer.add(cfg.summary_path, summary);
  if (result.stats.succeeded()) {
    writer.add(cfg.keys_path, qerasure::key_file_text(result.keys.final_alice, result.keys.final_bob));
  }
  writer.commit();
  std::cout << summary;
  return result.stats.succeeded() ? kExitProceed : kExitAbort;
}

int cmd_compare(const std::string& file_a, const std::string& file_b, const KeyValues& both,
                const KeyValues& only_a, const KeyValues& only_b, unsigned workers) {
  KeyValues flags_a = both;
  flags_a.insert(flags_a.end(), only_a.begin(), only_a.end());
  KeyValues flags_b = both;
  flags_b.insert(flags_b.end(), only_b.begin(), only_b.end());
  const std::vector<qerasure::SessionConfig> configs{build_config(file_a, flags_a).session,
                                                     build_config(file_b, flags_b).session};
  const auto results = qerasure::run_batch(configs, workers);
  std::cout << qerasure::comparison_table("A:" + std::filesystem::path(file_a).filename().string(),
                                          results[0].stats,
                                          "B:" + std::filesystem::path(file_b).filename().string(),
                                          results[1].stats);
  return kExitProceed;
}

int cmd_replay(const std::string& transcript_path, const std::string& summary_path) {
  std::ifstream in(transcript_path);
  if (!in) throw std::runtime_error("cannot open transcript '" + transcript_path + "'");
  const auto result = qerasure::replay_transcript(in);
  const auto fields = qerasure::summary_fields(result.config, result.stats);
  std::cout << qerasure::format_key_values(fields);
  if (summary_path.empty()) return kExitProceed;

  std::ifstream sin(summary_path);
  if (!sin) throw std::runtime_error("cannot open summary '" + summary_path + "'");
  const auto recorded = qerasure::parse_key_values(sin);
  const auto diffs = qerasure::diff_key_values(fields, recorded);
  if (diffs.empty()) {
    std::cerr << "replay: summary matches\n";
    return kExitProceed;
  }
  for (const auto& k : diffs) std::cerr << "replay: summary mismatch on '" << k << "'\n";
  return kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Erasure-QKD / BB84 session simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one session and write its artifacts");
  std::string run_config;
  run->add_option("--config", run_config, "Flat key=value configuration file");
  std::map<std::string, std::string> run_flags;
  for (const auto& key : qerasure::config_keys()) {
    run->add_option("--" + key, run_flags[key], "Overrides '" + key + "'");
  }

  auto* compare = app.add_subcommand("compare", "Run two configurations side by side");
  std::string cfg_a, cfg_b;
  std::vector<std::string> set_both, set_a, set_b;
  unsigned workers = 2;
  compare->add_option("config_a", cfg_a, "First configuration file")->required();
  compare->add_option("config_b", cfg_b, "Second configuration file")->required();
  compare->add_option("--set", set_both, "KEY=VALUE applied to both runs");
  compare->add_option("--set-a", set_a, "KEY=VALUE applied to the first run");
  compare->add_option("--set-b", set_b, "KEY=VALUE applied to the second run");
  compare->add_option("--workers", workers, "Parallel sessions")->capture_default_str();

  auto* replay = app.add_subcommand("replay", "Recompute a summary from a transcript and audit it");
  std::string transcript, summary;
  replay->add_option("transcript", transcript, "Transcript file")->required();
  replay->add_option("--summary", summary, "Recorded summary to check against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*run) {
      KeyValues flags;
      for (const auto& key : qerasure::config_keys()) {
        if (run->count("--" + key) > 0) flags.emplace_back(key, run_flags[key]);
      }
      return cmd_run(build_config(run_config, flags));
    }
    if (*compare) {
      auto to_kv = [](const std::vector<std::string>& v) {
        KeyValues kv;
        for (const auto& s : v) kv.push_back(split_assignment(s));
        return kv;
      };
      return cmd_compare(cfg_a, cfg_b, to_kv(set_both), to_kv(set_a), to_kv(set_b), workers);
    }
    if (*replay) return cmd_replay(transcript, summary);
  } catch (const std::exception& e) {
    std::cerr << "qerasure: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
