#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <span>
#include <thread>
#include <variant>
#include <vector>

#include "qerasure/bb84.hpp"
#include "qerasure/session.hpp"

namespace qerasure {

using Records = std::variant<std::vector<ProtocolRecord>, std::vector<Bb84Record>>;

struct ExperimentResult {
  SessionConfig config;
  Records records;
  KeyMaterial keys;
  SessionStats stats;
};

inline ExperimentResult run_experiment(const SessionConfig& config) {
  if (config.protocol == ProtocolKind::erasure) {
    auto r = run_session(config);
    return {config, std::move(r.records), std::move(r.keys), r.stats};
  }
  auto r = bb84_run(config);
  return {config, std::move(r.records), std::move(r.keys), r.stats};
}

/// Re-derives stats and keys from recorded rounds (see summarize()).
inline ExperimentResult summarize_records(const SessionConfig& config, Records records) {
  if (auto* erasure = std::get_if<std::vector<ProtocolRecord>>(&records)) {
    auto r = summarize(std::move(*erasure), config);
    return {config, std::move(r.records), std::move(r.keys), r.stats};
  }
  auto r = summarize_bb84(std::get<std::vector<Bb84Record>>(std::move(records)), config);
  return {config, std::move(r.records), std::move(r.keys), r.stats};
}

/// Runs independent sessions on up to `workers` threads. Each session owns
/// its seed, so results equal a serial run element for element. The first
/// exception (in input order) is rethrown after all workers finish.
inline std::vector<ExperimentResult> run_batch(std::span<const SessionConfig> configs, unsigned workers = 0) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(configs.size(), 1)));
  std::vector<ExperimentResult> results(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        results[i] = run_experiment(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace qerasure
