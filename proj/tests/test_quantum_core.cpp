#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qerasure/encoding.hpp"
#include "qerasure/quantum_core.hpp"

using namespace qerasure;

namespace {

constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2;

PureState unentangled_top() { return PureState::product(kInvSqrt2, kInvSqrt2, kPolPlus45); }
PureState unentangled_bottom() { return PureState::product(-kInvSqrt2, kInvSqrt2, kPolPlus45); }
PureState entangled_top() { return PureState::from_amplitudes({kInvSqrt2, 0.0, 0.0, kInvSqrt2}); }

PureState random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  PureState::Amplitudes a;
  double n = 0.0;
  for (auto& x : a) {
    x = {g(rng), g(rng)};
    n += std::norm(x);
  }
  for (auto& x : a) x /= std::sqrt(n);
  return PureState::from_amplitudes(a);
}

}  // namespace

TEST(PureState, RejectsUnnormalizedAmplitudes) {
  EXPECT_THROW(PureState::from_amplitudes({1.0, 1.0, 0.0, 0.0}), std::invalid_argument);
  EXPECT_NO_THROW(PureState::from_amplitudes({0.0, 0.0, 0.0, 1.0}));
}

TEST(PureState, EquivalenceIgnoresGlobalPhase) {
  const auto s = entangled_top();
  auto amps = s.amplitudes();
  for (auto& a : amps) a *= std::polar(1.0, 0.7);
  EXPECT_TRUE(equivalent(s, PureState::from_amplitudes(amps)));
  EXPECT_FALSE(equivalent(s, unentangled_top()));
}

TEST(BeamSplitter, SplitsUpperInputIntoBothArms) {
  const auto out = apply_beam_splitter(PureState::product(1.0, 0.0, kPolPlus45));
  EXPECT_TRUE(equivalent(out, unentangled_top()));
}

TEST(BeamSplitter, RecombinesSymmetricSuperpositionAtSecondPort) {
  const auto out = apply_beam_splitter(unentangled_top());
  EXPECT_TRUE(equivalent(out, PureState::product(0.0, 1.0, kPolPlus45)));
}

TEST(BeamSplitter, RejectsUnnormalizedInput) {
  EXPECT_THROW(apply_beam_splitter(PureState::unchecked({1.0, 1.0, 0.0, 0.0})), std::invalid_argument);
}

TEST(BeamSplitter, PreservesNormAndInnerProducts) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_state(rng);
    const auto b = random_state(rng);
    const auto ua = apply_beam_splitter(a);
    const auto ub = apply_beam_splitter(b);
    EXPECT_NEAR(ua.norm_squared(), 1.0, 1e-9);
    EXPECT_LT(std::abs(inner_product(ua, ub) - inner_product(a, b)), 1e-9);
  }
}

TEST(Rotators, AliceSettingsEntangle) {
  const auto out = apply_rotators(unentangled_top(), kAliceRotators);
  EXPECT_TRUE(equivalent(out, entangled_top()));
}

TEST(Rotators, BobSettingsErase) {
  const auto out = apply_rotators(entangled_top(), kBobRotators);
  EXPECT_TRUE(equivalent(out, unentangled_top()));
}

TEST(Rotators, EmptySettingsAreIdentity) {
  const auto s = entangled_top();
  EXPECT_EQ(apply_rotators(s, std::span<const RotatorSetting>{}).amplitudes(), s.amplitudes());
}

TEST(Rotators, DuplicatePathRejected) {
  EXPECT_THROW(apply_rotators(unentangled_top(), {RotatorSetting{Path::upper, 0.1}, RotatorSetting{Path::upper, 0.2}}),
               std::invalid_argument);
}

TEST(Rotators, UnitaryOnRandomStates) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_state(rng);
    const auto b = random_state(rng);
    const std::array<RotatorSetting, 2> s{{{Path::upper, angle(rng)}, {Path::lower, angle(rng)}}};
    const auto ra = apply_rotators(a, s);
    const auto rb = apply_rotators(b, s);
    EXPECT_NEAR(ra.norm_squared(), 1.0, 1e-9);
    EXPECT_LT(std::abs(inner_product(ra, rb) - inner_product(a, b)), 1e-9);
  }
}

TEST(DetectorDistribution, InterferenceAndWhichPath) {
  const auto d = detector_distribution(unentangled_top());
  EXPECT_EQ(d.d1, 0.0);
  EXPECT_EQ(d.d2, 1.0);

  const auto e = detector_distribution(entangled_top());
  EXPECT_NEAR(e.d1, 0.5, 1e-12);
  EXPECT_NEAR(e.d2, 0.5, 1e-12);

  const auto b = detector_distribution(unentangled_bottom());
  EXPECT_EQ(b.d1, 1.0);
  EXPECT_EQ(b.d2, 0.0);
}

TEST(DetectorDistribution, SumsToOne) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto d = detector_distribution(random_state(rng));
    EXPECT_NEAR(d.d1 + d.d2, 1.0, 1e-9);
  }
}

TEST(SampleDetection, CheckModeSeesOnlyPlus45ForInterference) {
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const auto det = sample_detection(unentangled_top(), rng, true);
    EXPECT_EQ(det.detector, Detector::D2);
    ASSERT_TRUE(det.pol.has_value());
    EXPECT_EQ(*det.pol, PolTag::plus45);
  }
}

// After the beam splitter each port carries a definite diagonal polarization:
// D1 sees (H - V)/sqrt2 and D2 sees (H + V)/sqrt2.
TEST(SampleDetection, CheckModeOnEntangledStatePairsPortWithPolarization) {
  const auto pp = port_polarization_distribution(entangled_top());
  EXPECT_NEAR(pp[0][static_cast<int>(PolTag::minus45)], 0.5, 1e-12);
  EXPECT_NEAR(pp[0][static_cast<int>(PolTag::plus45)], 0.0, 1e-12);
  EXPECT_NEAR(pp[1][static_cast<int>(PolTag::plus45)], 0.5, 1e-12);
  EXPECT_NEAR(pp[1][static_cast<int>(PolTag::minus45)], 0.0, 1e-12);

  Rng rng(23);
  constexpr int n = 40000;
  int counts[2][2] = {};
  for (int i = 0; i < n; ++i) {
    const auto det = sample_detection(entangled_top(), rng, true);
    ++counts[static_cast<int>(det.detector)][static_cast<int>(*det.pol)];
  }
  EXPECT_EQ(counts[0][static_cast<int>(PolTag::plus45)], 0);
  EXPECT_EQ(counts[1][static_cast<int>(PolTag::minus45)], 0);
  EXPECT_NEAR(counts[0][static_cast<int>(PolTag::minus45)] / double(n), 0.5, 4 * std::sqrt(0.25 / n));
}

TEST(SampleDetection, DegenerateDistributionIsDeterministicForAnySeed) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    for (int i = 0; i < 100; ++i) {
      const auto det = sample_detection(unentangled_top(), rng, false);
      EXPECT_EQ(det.detector, Detector::D2);
      EXPECT_FALSE(det.pol.has_value());
    }
  }
}

TEST(SampleDetection, MonteCarloMatchesBornRule) {
  std::mt19937_64 gen(9);
  Rng rng(10);
  constexpr int n = 20000;
  for (int k = 0; k < 5; ++k) {
    const auto s = random_state(gen);
    const double p = detector_distribution(s).d1;
    int d1 = 0;
    for (int i = 0; i < n; ++i) d1 += sample_detection(s, rng, false).detector == Detector::D1;
    EXPECT_NEAR(d1 / double(n), p, 4 * std::sqrt(p * (1 - p) / n) + 1e-12);
  }
}

TEST(Concurrence, ClassifiesProductAndEntangledStates) {
  EXPECT_EQ(concurrence(unentangled_top()), 0.0);
  EXPECT_NEAR(concurrence(entangled_top()), 1.0, 1e-12);
  EXPECT_EQ(concurrence(PureState()), 0.0);
}

TEST(Concurrence, ErasureRoundTripRestoresProductState) {
  for (auto source : {SourcePort::S1_top, SourcePort::S2_bottom}) {
    const auto erased = apply_rotators(alice_prepare(source, 1), kBobRotators);
    EXPECT_LT(concurrence(erased), 1e-9);
    EXPECT_TRUE(equivalent(erased, alice_prepare(source, 0)));
  }
}
