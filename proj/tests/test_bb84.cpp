#include <gtest/gtest.h>

#include <cmath>

#include "qerasure/analysis.hpp"
#include "qerasure/bb84.hpp"
#include "qerasure/session.hpp"

using namespace qerasure;

namespace {

SessionConfig bb84_config(Attack attack, std::uint64_t seed) {
  SessionConfig c;
  c.protocol = ProtocolKind::bb84;
  c.attack = attack;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Bb84Measure, MatchingBasisIsDeterministic) {
  Rng rng(1);
  for (int basis = 0; basis < 2; ++basis) {
    for (int bit = 0; bit < 2; ++bit) {
      const auto b = static_cast<Bb84Basis>(basis);
      EXPECT_EQ(bb84_zero_fraction(bb84_prepare(b, bit), b), bit == 0 ? 1.0 : 0.0);
      for (int i = 0; i < 100; ++i) EXPECT_EQ(bb84_measure(bb84_prepare(b, bit), b, rng), bit);
    }
  }
}

TEST(Bb84Measure, MismatchedBasisIsFairCoin) {
  EXPECT_NEAR(bb84_zero_fraction(bb84_prepare(Bb84Basis::rectilinear, 1), Bb84Basis::diagonal), 0.5, 1e-12);
  EXPECT_NEAR(bb84_zero_fraction(bb84_prepare(Bb84Basis::diagonal, 0), Bb84Basis::rectilinear), 0.5, 1e-12);
}

TEST(Bb84Run, HonestKeepsHalfWithoutErrors) {
  const auto res = bb84_run(bb84_config(Attack::none, 3));
  EXPECT_NEAR(res.stats.keep_rate, 0.5, 0.01);
  EXPECT_EQ(res.stats.sifted_errors, 0u);
  EXPECT_EQ(*res.stats.sifted_qber, 0.0);
  EXPECT_EQ(res.stats.verdict, Verdict::proceed);
  for (const auto& r : res.records) EXPECT_EQ(r.kept, r.alice_basis == r.bob_basis);
}

TEST(Bb84Run, KeepRateWithinBinomialBound) {
  const auto res = bb84_run(bb84_config(Attack::none, 4));
  const double n = static_cast<double>(res.stats.rounds);
  EXPECT_NEAR(res.stats.keep_rate, 0.5, 4 * std::sqrt(0.25 / n));
}

TEST(Bb84Run, InterceptResendQuarterErrors) {
  const auto res = bb84_run(bb84_config(Attack::intercept_resend, 5));
  EXPECT_NEAR(*res.stats.sifted_qber, 0.25, 0.01);
  EXPECT_EQ(res.stats.i_alice_eve, 0.5);
  EXPECT_EQ(mutual_information(bb84_intercept_table()), 0.5);
  ASSERT_TRUE(res.stats.i_alice_eve_empirical.has_value());
  EXPECT_NEAR(*res.stats.i_alice_eve_empirical, 0.5, 0.01);
}

TEST(Bb84Blinding, FullKeyWithoutErrors) {
  SessionConfig c;
  c.seed = 6;
  const auto res = bb84_blinding(c);
  EXPECT_EQ(res.stats.sifted_errors, 0u);
  EXPECT_EQ(*res.stats.sifted_qber, 0.0);
  ASSERT_TRUE(res.stats.eve_agreement.has_value());
  EXPECT_EQ(*res.stats.eve_agreement, 1.0);
  for (const auto& r : res.records) {
    if (r.bob_bit) {
      EXPECT_EQ(r.bob_basis, r.eve->basis);
    }
  }
}

TEST(Bb84Blinding, MismatchedBasisRoundGivesNoClick) {
  const BlindedDetectorModel model(0.9);
  const auto pulse = bb84_prepare(Bb84Basis::diagonal, 1);
  EXPECT_FALSE(bb84_blinded_response(pulse, Bb84Basis::rectilinear, model).has_value());
  EXPECT_EQ(bb84_blinded_response(pulse, Bb84Basis::diagonal, model), 1);
}

// Same threshold detectors, same attack: BB84 leaks the key silently while
// the erasure protocol shows a third of its sifted bits in error.
TEST(Contrast, BlindingIsSilentOnBb84ButNotOnErasure) {
  SessionConfig c;
  c.attack = Attack::blinding;
  c.blinding_threshold = 0.9;
  c.seed = 31;
  const auto erasure = run_session(c);
  const auto bb84 = bb84_blinding(c);
  EXPECT_EQ(*bb84.stats.sifted_qber, 0.0);
  EXPECT_EQ(*bb84.stats.eve_agreement, 1.0);
  EXPECT_NEAR(*erasure.stats.sifted_qber, 1.0 / 3.0, 0.01);
  EXPECT_EQ(erasure.stats.verdict, Verdict::abort);
}

TEST(Bb84Run, RejectsWrongProtocol) {
  SessionConfig c;
  EXPECT_THROW(bb84_run(c), ConfigError);
}

TEST(Bb84Run, DeterministicInSeed) {
  auto c = bb84_config(Attack::intercept_resend, 8);
  c.rounds = 2000;
  EXPECT_EQ(bb84_run(c).records, bb84_run(c).records);
}
