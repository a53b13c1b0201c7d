#include <gtest/gtest.h>

#include <numbers>

#include "oracle.hpp"
#include "qerasure/adversary.hpp"
#include "qerasure/analysis.hpp"
#include "qerasure/encoding.hpp"
#include "qerasure/session.hpp"

using oracle::Rational;

namespace {

// The same branch sums, in double precision, through the library.
struct LibTotals {
  double kept = 0, kept_error = 0, disagree_detected = 0, disagree_minus45 = 0, no_click = 0, double_click = 0;
};

void lib_detect(LibTotals& t, double w, const qerasure::PureState& arriving, qerasure::SourcePort src, int a, int b) {
  using namespace qerasure;
  const auto field = apply_bob_setting(arriving, b);
  const double keep = detector_distribution(field).of(keep_detector(src));
  t.kept += w * keep;
  if (a != b) {
    const auto pp = port_polarization_distribution(field);
    t.kept_error += w * keep;
    t.disagree_detected += w;
    t.disagree_minus45 += w * (pp[0][1] + pp[1][1]);
  }
}

LibTotals lib_enumerate(qerasure::Attack attack, double threshold = 0.9) {
  using namespace qerasure;
  LibTotals t;
  const BlindedDetectorModel model(threshold);
  const ResendRule rule;
  for (auto src : {SourcePort::S1_top, SourcePort::S2_bottom})
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const double w = 0.125;
        const auto sent = alice_prepare(src, a);
        if (attack == Attack::none) {
          lib_detect(t, w, sent, src, a, b);
          continue;
        }
        for (auto basis : {EveBasis::no_rotation, EveBasis::rotation}) {
          const auto seen = basis == EveBasis::rotation ? apply_rotators(sent, kBobRotators) : sent;
          const auto d = detector_distribution(seen);
          for (auto port : {EvePort::upper, EvePort::lower}) {
            const EveOutcome o{basis, port};
            const double we = w * 0.5 * (port == EvePort::upper ? d.d1 : d.d2);
            if (we == 0.0) continue;
            if (attack == Attack::intercept_resend) {
              lib_detect(t, we, prepare(rule(o)), src, a, b);
              continue;
            }
            const auto f = routing_fractions(eve_blinding_pulse(o), b);
            const bool c1 = model.clicks(f.d1), c2 = model.clicks(f.d2);
            if (c1 && c2) t.double_click += we;
            if (!c1 && !c2) {
              t.no_click += we;
              continue;
            }
            if ((c1 ? Detector::D1 : Detector::D2) == keep_detector(src)) {
              t.kept += we;
              if (a != b) t.kept_error += we;
            }
          }
        }
      }
  return t;
}

void expect_match(const oracle::Totals& o, const LibTotals& l) {
  EXPECT_NEAR(l.kept, o.kept.value(), 1e-12);
  EXPECT_NEAR(l.kept_error, o.kept_error.value(), 1e-12);
  EXPECT_NEAR(l.disagree_detected, o.disagree_detected.value(), 1e-12);
  EXPECT_NEAR(l.disagree_minus45, o.disagree_minus45.value(), 1e-12);
  EXPECT_NEAR(l.no_click, o.no_click.value(), 1e-12);
  EXPECT_NEAR(l.double_click, o.double_click.value(), 1e-12);
}

}  // namespace

TEST(Oracle, HonestRatesAreExact) {
  const auto t = oracle::enumerate(oracle::Attack::none);
  EXPECT_EQ(t.kept, Rational(1, 4));
  EXPECT_EQ(t.kept_error, Rational(0));
  EXPECT_EQ(t.alarm(), Rational(0));
}

TEST(Oracle, InterceptResendRatesAreExact) {
  const auto t = oracle::enumerate(oracle::Attack::intercept_resend);
  EXPECT_EQ(t.kept, Rational(3, 8));
  EXPECT_EQ(t.kept_error, Rational(1, 8));
  EXPECT_EQ(t.qber(), Rational(1, 3));
  EXPECT_EQ(t.alarm(), Rational(1, 4));
}

TEST(Oracle, BlindingRatesAreExact) {
  const auto t = oracle::enumerate(oracle::Attack::blinding);
  EXPECT_EQ(t.kept, Rational(3, 8));
  EXPECT_EQ(t.qber(), Rational(1, 3));
  EXPECT_EQ(t.double_click, Rational(0));
  EXPECT_EQ(t.no_click, Rational(1, 2));
}

TEST(Oracle, BlindingIndependentOfThresholdAboveOneHalf) {
  for (auto th : {Rational(51, 100), Rational(3, 4), Rational(1)}) {
    const auto t = oracle::enumerate(oracle::Attack::blinding, th);
    EXPECT_EQ(t.qber(), Rational(1, 3));
    EXPECT_EQ(t.double_click, Rational(0));
  }
}

TEST(Oracle, EveOutcomeTableIsExact) {
  const auto e = oracle::eve_table();
  EXPECT_EQ(e.r[0], Rational(3, 8));
  EXPECT_EQ(e.r[1], Rational(1, 8));
  EXPECT_EQ(e.r[2], Rational(1, 8));
  EXPECT_EQ(e.r[3], Rational(3, 8));
  const auto lib = qerasure::erasure_intercept_table();
  for (int i = 0; i < 2; ++i)
    for (int r = 0; r < 4; ++r) EXPECT_NEAR(lib.p_r_given_i(static_cast<std::size_t>(r), i), e.r_given_i[i][r].value(), 1e-15);
}

TEST(Oracle, EntangledStateCheckModeOutcomes) {
  const auto pp = oracle::port_pol_probs(oracle::prepared(0, 1));
  EXPECT_EQ(pp[0][0], Rational(0));
  EXPECT_EQ(pp[0][1], Rational(1, 2));
  EXPECT_EQ(pp[1][0], Rational(1, 2));
  EXPECT_EQ(pp[1][1], Rational(0));
}

TEST(OracleEquivalence, LibraryBranchSumsMatchExactly) {
  expect_match(oracle::enumerate(oracle::Attack::none), lib_enumerate(qerasure::Attack::none));
  expect_match(oracle::enumerate(oracle::Attack::intercept_resend), lib_enumerate(qerasure::Attack::intercept_resend));
  expect_match(oracle::enumerate(oracle::Attack::blinding), lib_enumerate(qerasure::Attack::blinding));
  expect_match(oracle::enumerate(oracle::Attack::blinding, Rational(3, 5)), lib_enumerate(qerasure::Attack::blinding, 0.6));
}

TEST(OracleEquivalence, PreparedStatesAgree) {
  for (int src = 0; src < 2; ++src)
    for (int bit = 0; bit < 2; ++bit) {
      const auto o = oracle::prepared(src, bit);
      const auto l = qerasure::alice_prepare(static_cast<qerasure::SourcePort>(src), bit);
      for (std::size_t k = 0; k < 4; ++k) {
        const double v = o[k].a.value() + o[k].b.value() * std::numbers::sqrt2;
        EXPECT_NEAR(l.amplitudes()[k].real(), v, 1e-12);
        EXPECT_NEAR(l.amplitudes()[k].imag(), 0.0, 1e-12);
      }
    }
}
