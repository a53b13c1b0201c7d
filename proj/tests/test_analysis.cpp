#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qerasure/analysis.hpp"
#include "qerasure/session.hpp"

using namespace qerasure;

TEST(MutualInformation, ErasureTableGivesPoint311) {
  const double i = mutual_information(erasure_intercept_table());
  EXPECT_NEAR(i, 0.311, 0.001);
  // Symbolically: two outcomes are certain, two have posterior (2/3, 1/3),
  // each of the latter with probability 3/8.
  const double h13 = -(1.0 / 3) * std::log2(1.0 / 3) - (2.0 / 3) * std::log2(2.0 / 3);
  EXPECT_NEAR(i, 1.0 - 0.75 * h13, 1e-12);
  EXPECT_NEAR(i, 0.3113, 1e-3);
}

TEST(MutualInformation, ErasureTableMarginals) {
  const auto t = erasure_intercept_table();
  EXPECT_DOUBLE_EQ(t.p_r(0), 3.0 / 8);
  EXPECT_DOUBLE_EQ(t.p_r(1), 1.0 / 8);
  EXPECT_DOUBLE_EQ(t.p_r(2), 1.0 / 8);
  EXPECT_DOUBLE_EQ(t.p_r(3), 3.0 / 8);
}

TEST(MutualInformation, IndependentOutcomesCarryNothing) {
  const ProbabilityTable t({0.5, 0.5}, {std::vector<double>{0.2, 0.3, 0.5}, std::vector<double>{0.2, 0.3, 0.5}},
                           {"a", "b", "c"});
  EXPECT_NEAR(mutual_information(t), 0.0, 1e-12);
}

TEST(MutualInformation, PerfectCorrelationIsOneBit) {
  const ProbabilityTable t({0.5, 0.5}, {std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 1.0}}, {"0", "1"});
  EXPECT_DOUBLE_EQ(mutual_information(t), 1.0);
}

TEST(MutualInformation, Bb84TableIsOneHalf) { EXPECT_DOUBLE_EQ(mutual_information(bb84_intercept_table()), 0.5); }

TEST(ProbabilityTable, RejectsInvalidTables) {
  EXPECT_THROW(ProbabilityTable({0.6, 0.6}, {std::vector<double>{1.0}, std::vector<double>{1.0}}, {"x"}),
               std::invalid_argument);
  EXPECT_THROW(ProbabilityTable({0.5, 0.5}, {std::vector<double>{0.5, 0.4}, std::vector<double>{0.5, 0.5}}, {"x", "y"}),
               std::invalid_argument);
  EXPECT_THROW(ProbabilityTable({0.5, 0.5}, {std::vector<double>{1.0}, std::vector<double>{0.5, 0.5}}, {"x"}),
               std::invalid_argument);
}

TEST(MutualInformation, BoundedByOneBitOnRandomTables) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> width(1, 6);
  for (int trial = 0; trial < 500; ++trial) {
    const int w = width(rng);
    std::array<std::vector<double>, 2> rows;
    for (auto& row : rows) {
      double sum = 0.0;
      for (int r = 0; r < w; ++r) {
        row.push_back(u(rng) < 0.2 ? 0.0 : u(rng));
        sum += row.back();
      }
      if (sum == 0.0) {
        row[0] = 1.0;
        sum = 1.0;
      }
      for (auto& x : row) x /= sum;
    }
    // Uniform P(i) keeps the bound at H(i) = 1, as the formula assumes.
    const ProbabilityTable t({0.5, 0.5}, rows, std::vector<std::string>(static_cast<std::size_t>(w), "r"));
    const double i = mutual_information(t);
    EXPECT_GE(i, -1e-12);
    EXPECT_LE(i, 1.0 + 1e-12);
  }
}

class EmpiricalTable : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SessionConfig c;
    c.attack = Attack::intercept_resend;
    c.rounds = 1000000;
    c.seed = 2024;
    records_ = new std::vector<ProtocolRecord>(simulate_rounds(c));
  }
  static void TearDownTestSuite() {
    delete records_;
    records_ = nullptr;
  }
  static std::vector<ProtocolRecord>* records_;
};
std::vector<ProtocolRecord>* EmpiricalTable::records_ = nullptr;

TEST_F(EmpiricalTable, ConvergesToAnalyticTable) {
  const auto t = empirical_probability_table(*records_);
  EXPECT_NEAR(t.p_r(0), 0.375, 0.005);
  EXPECT_EQ(t.p_r_given_i(1, 0), 0.0);  // outcome 1 never follows bit 0
  EXPECT_EQ(t.p_r_given_i(2, 1), 0.0);  // outcome 0' never follows bit 1
  EXPECT_LT(total_variation(t, erasure_intercept_table()), 0.01);
  EXPECT_NEAR(mutual_information(t), mutual_information(erasure_intercept_table()), 0.005);
}

TEST_F(EmpiricalTable, MinimumCountEnforced) {
  EXPECT_THROW(empirical_probability_table(*records_, records_->size() + 1), InsufficientData);
}

TEST(EmpiricalTableHonest, NoEveOutcomesIsAnError) {
  SessionConfig c;
  c.rounds = 1000;
  EXPECT_THROW(empirical_probability_table(simulate_rounds(c)), InsufficientData);
}

TEST(ProbabilityTable, DelimitedExport) {
  const auto text = erasure_intercept_table().to_delimited();
  EXPECT_NE(text.find("label,p_r,p_r_given_i0,p_r_given_i1\n"), std::string::npos);
  EXPECT_NE(text.find("0',0.125000000,0.250000000,0.000000000"), std::string::npos);
}

TEST(Qber, RatioAndErrors) {
  EXPECT_DOUBLE_EQ(qber(125, 375), 1.0 / 3.0);
  EXPECT_THROW(qber(0, 0), std::invalid_argument);
  EXPECT_THROW(qber(3, 2), std::invalid_argument);
}

TEST(BinaryEntropy, EndpointsAndMidpoint) {
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), 1.0);
  EXPECT_DOUBLE_EQ(binary_entropy(0.0), 0.0);
  EXPECT_DOUBLE_EQ(binary_entropy(1.0), 0.0);
  EXPECT_THROW(binary_entropy(1.5), std::invalid_argument);
}

TEST(IAliceBob, AtOneThird) {
  EXPECT_NEAR(i_alice_bob(1.0 / 3.0), 0.0817, 0.0005);
  EXPECT_NEAR(i_alice_bob(0.05), 0.7136, 0.0005);
}

TEST(IAliceBob, MonotoneDecreasingOnLowerHalf) {
  double prev = i_alice_bob(0.0);
  for (int k = 1; k <= 500; ++k) {
    const double cur = i_alice_bob(k / 1000.0);
    EXPECT_LT(cur, prev);
    prev = cur;
  }
}

TEST(Decide, DefaultThresholds) {
  EXPECT_EQ(decide({0.0, 1.0, 0.0, Verdict::abort}), Verdict::proceed);
  EXPECT_EQ(decide({0.0, i_alice_bob(1.0 / 3.0), 1.0 / 3.0, Verdict::abort}), Verdict::abort);
  // QBER passes but the information condition is overridden to fail.
  EXPECT_EQ(decide({0.0, 0.25, 0.05, Verdict::abort}), Verdict::abort);
  EXPECT_EQ(decide({0.0, i_alice_bob(0.05), 0.05, Verdict::abort}), Verdict::proceed);
}
