#pragma once

// Information-theoretic bookkeeping: Eve's mutual information from an
// outcome table, QBER, binary entropy, and the proceed/abort rule.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qerasure/protocol.hpp"

namespace qerasure {

inline constexpr double kTableTolerance = 1e-9;
inline constexpr double kDefaultQberThreshold = 1.0 / 3.0;
inline constexpr double kDefaultInfoThreshold = 0.311;

/// Raised when an empirical estimate has too little (or no) data.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Alice's bit distribution P(i), i in {0,1}, and Eve's outcome distribution
/// conditioned on it, P(r|i), over an arbitrary labelled outcome set.
class ProbabilityTable {
 public:
  ProbabilityTable(std::array<double, 2> p_i, std::array<std::vector<double>, 2> p_r_given_i,
                   std::vector<std::string> labels)
      : p_i_(p_i), p_r_given_i_(std::move(p_r_given_i)), labels_(std::move(labels)) {
    validate();
  }

  /// Normalizes raw counts[i][r] into P(i) and P(r|i).
  static ProbabilityTable from_counts(const std::array<std::vector<std::size_t>, 2>& counts,
                                      std::vector<std::string> labels) {
    std::array<double, 2> totals{};
    for (int i = 0; i < 2; ++i) {
      for (auto c : counts[i]) totals[i] += static_cast<double>(c);
    }
    if (totals[0] == 0.0 || totals[1] == 0.0) {
      throw InsufficientData("probability table: no observations for one of Alice's bits");
    }
    const double all = totals[0] + totals[1];
    std::array<std::vector<double>, 2> cond;
    for (int i = 0; i < 2; ++i) {
      for (auto c : counts[i]) cond[i].push_back(static_cast<double>(c) / totals[i]);
    }
    return ProbabilityTable({totals[0] / all, totals[1] / all}, std::move(cond), std::move(labels));
  }

  std::size_t outcomes() const { return labels_.size(); }
  double p_i(int i) const { return p_i_[i]; }
  double p_r_given_i(std::size_t r, int i) const { return p_r_given_i_[i][r]; }
  double p_r(std::size_t r) const {
    return p_i_[0] * p_r_given_i_[0][r] + p_i_[1] * p_r_given_i_[1][r];
  }
  double joint(std::size_t r, int i) const { return p_i_[i] * p_r_given_i_[i][r]; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Delimited export: label,p_r,p_r_given_i0,p_r_given_i1 with the P(i)
  /// values in a leading comment.
  std::string to_delimited() const {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "# p_i0=%.9f p_i1=%.9f\n", p_i_[0], p_i_[1]);
    out += buf;
    out += "label,p_r,p_r_given_i0,p_r_given_i1\n";
    for (std::size_t r = 0; r < outcomes(); ++r) {
      std::snprintf(buf, sizeof buf, "%s,%.9f,%.9f,%.9f\n", labels_[r].c_str(), p_r(r),
                    p_r_given_i_[0][r], p_r_given_i_[1][r]);
      out += buf;
    }
    return out;
  }

 private:
  void validate() const {
    auto bad = [](double p) { return !(p >= -kTableTolerance && p <= 1.0 + kTableTolerance); };
    if (bad(p_i_[0]) || bad(p_i_[1]) || std::abs(p_i_[0] + p_i_[1] - 1.0) > kTableTolerance) {
      throw std::invalid_argument("probability table: P(i) must be a distribution");
    }
    if (labels_.empty()) throw std::invalid_argument("probability table: no outcomes");
    for (int i = 0; i < 2; ++i) {
      if (p_r_given_i_[i].size() != labels_.size()) {
        throw std::invalid_argument("probability table: row width does not match labels");
      }
      double sum = 0.0;
      for (double p : p_r_given_i_[i]) {
        if (bad(p)) throw std::invalid_argument("probability table: entry outside [0,1]");
        sum += p;
      }
      if (std::abs(sum - 1.0) > kTableTolerance) {
        throw std::invalid_argument("probability table: P(r|i) row does not sum to 1");
      }
    }
  }

  std::array<double, 2> p_i_;
  std::array<std::vector<double>, 2> p_r_given_i_;
  std::vector<std::string> labels_;
};

/// I = 1 + sum_r P(r) sum_i P(i|r) log2 P(i|r), with P(i|r) = P(r|i)P(i)/P(r)
/// and 0 log 0 = 0. For a uniform P(i) this is H(i) - H(i|r).
inline double mutual_information(const ProbabilityTable& table) {
  double sum = 0.0;
  for (std::size_t r = 0; r < table.outcomes(); ++r) {
    const double pr = table.p_r(r);
    if (pr <= 0.0) continue;
    double inner = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double post = table.joint(r, i) / pr;
      if (post > 0.0) inner += post * std::log2(post);
    }
    sum += pr * inner;
  }
  return 1.0 + sum;
}

/// Total-variation distance between the joint distributions P(i, r).
inline double total_variation(const ProbabilityTable& a, const ProbabilityTable& b) {
  if (a.outcomes() != b.outcomes()) throw std::invalid_argument("total_variation: shape mismatch");
  double d = 0.0;
  for (std::size_t r = 0; r < a.outcomes(); ++r) {
    for (int i = 0; i < 2; ++i) d += std::abs(a.joint(r, i) - b.joint(r, i));
  }
  return d / 2.0;
}

inline std::vector<std::string> erasure_outcome_labels() {
  return {std::string(kOutcomeLabels[0]), std::string(kOutcomeLabels[1]),
          std::string(kOutcomeLabels[2]), std::string(kOutcomeLabels[3])};
}

/// Eve's outcome table for the erasure protocol, conditioned on the source
/// being announced as top. Columns are r = 0, 1, 0', 1'.
inline ProbabilityTable erasure_intercept_table() {
  return ProbabilityTable({0.5, 0.5},
                          {std::vector<double>{0.5, 0.0, 0.25, 0.25},
                           std::vector<double>{0.25, 0.25, 0.0, 0.5}},
                          erasure_outcome_labels());
}

/// BB84 intercept-resend conditioned on Alice's announced basis being
/// rectilinear. Columns: (rect,0), (rect,1), (diag,0), (diag,1).
inline ProbabilityTable bb84_intercept_table() {
  return ProbabilityTable({0.5, 0.5},
                          {std::vector<double>{0.5, 0.0, 0.25, 0.25},
                           std::vector<double>{0.0, 0.5, 0.25, 0.25}},
                          {"rect:0", "rect:1", "diag:0", "diag:1"});
}

/// BB84 under blinding, on kept rounds: Eve's bit always equals Alice's.
inline ProbabilityTable bb84_blinding_table() {
  return ProbabilityTable({0.5, 0.5}, {std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 1.0}},
                          {"0", "1"});
}

/// Counts Eve's outcome labels against Alice's bit over rounds whose source
/// was top. Throws InsufficientData if fewer than `min_count` such rounds
/// carry an Eve outcome (in particular, for honest transcripts).
inline ProbabilityTable empirical_probability_table(std::span<const ProtocolRecord> records,
                                                    std::size_t min_count = 1) {
  std::array<std::vector<std::size_t>, 2> counts{std::vector<std::size_t>(4, 0),
                                                 std::vector<std::size_t>(4, 0)};
  std::size_t n = 0;
  for (const auto& r : records) {
    if (!r.eve || r.source != SourcePort::S1_top) continue;
    ++counts[r.alice_bit][static_cast<std::size_t>(r.eve->label_index())];
    ++n;
  }
  if (n == 0 || n < min_count) {
    throw InsufficientData("empirical probability table: " + std::to_string(n) +
                           " eavesdropped top-source rounds, need " + std::to_string(std::max<std::size_t>(min_count, 1)));
  }
  return ProbabilityTable::from_counts(counts, erasure_outcome_labels());
}

inline double qber(std::size_t errors, std::size_t total) {
  if (total == 0) throw std::invalid_argument("qber: total must be positive");
  if (errors > total) throw std::invalid_argument("qber: more errors than positions");
  return static_cast<double>(errors) / static_cast<double>(total);
}

inline double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binary_entropy: p outside [0,1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

/// Binary-symmetric-channel estimate of Bob's information, 1 - h2(qber).
inline double i_alice_bob(double qber_value) { return 1.0 - binary_entropy(qber_value); }

enum class Verdict { proceed, abort };

inline std::string_view to_string(Verdict v) { return v == Verdict::proceed ? "proceed" : "abort"; }

struct InfoMetrics {
  double i_alice_eve = 0.0;
  double i_alice_bob = 0.0;
  double qber = 0.0;
  Verdict verdict = Verdict::abort;
};

/// Proceed iff qber < qber_threshold and I(alice,bob) > info_threshold.
inline Verdict decide(const InfoMetrics& metrics, double qber_threshold = kDefaultQberThreshold,
                      double info_threshold = kDefaultInfoThreshold) {
  return (metrics.qber < qber_threshold && metrics.i_alice_bob > info_threshold) ? Verdict::proceed
                                                                                 : Verdict::abort;
}

}  // namespace qerasure
