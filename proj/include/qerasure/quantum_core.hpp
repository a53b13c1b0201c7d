#pragma once

// State-vector model of a single photon's path (upper |0>, lower |1>) and
// polarization (H, V) degrees of freedom, plus the optical elements of the
// erasure interferometer: 50-50 beam splitters, switchable polarization
// rotators and the two output detectors.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qerasure/random.hpp"

namespace qerasure {

using Amplitude = std::complex<double>;

inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kStateTolerance = 1e-9;
// Probabilities this close to 0 or 1 are treated as exact.
inline constexpr double kSnapTolerance = 1e-12;

enum class Path : int { upper = 0, lower = 1 };
enum class Polarization : int { H = 0, V = 1 };

/// Two complex amplitudes over {H, V}.
struct PolarizationVector {
  Amplitude h;
  Amplitude v;
};

inline const PolarizationVector kPolH{1.0, 0.0};
inline const PolarizationVector kPolV{0.0, 1.0};
inline const PolarizationVector kPolPlus45{std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2};
inline const PolarizationVector kPolMinus45{std::numbers::sqrt2 / 2, -std::numbers::sqrt2 / 2};

/// Normalized 4-amplitude pure state, basis order
/// (upper,H), (upper,V), (lower,H), (lower,V).
///
/// Equality is up to a global phase (see equivalent()).
class PureState {
 public:
  using Amplitudes = std::array<Amplitude, 4>;

  /// |0>|H>.
  PureState() : amps_{1.0, 0.0, 0.0, 0.0} {}

  /// Throws std::invalid_argument unless sum |a|^2 = 1 within kNormTolerance.
  static PureState from_amplitudes(const Amplitudes& amps) {
    PureState s(amps);
    if (!s.is_normalized()) {
      throw std::invalid_argument("PureState: amplitudes are not normalized");
    }
    return s;
  }

  /// (upper_amp |0> + lower_amp |1>) (x) pol.
  static PureState product(Amplitude upper_amp, Amplitude lower_amp,
                           const PolarizationVector& pol) {
    return from_amplitudes({upper_amp * pol.h, upper_amp * pol.v,
                            lower_amp * pol.h, lower_amp * pol.v});
  }

  /// Skips validation; for intermediate results of unitary maps.
  static PureState unchecked(const Amplitudes& amps) { return PureState(amps); }

  static constexpr std::size_t index(Path path, Polarization pol) {
    return static_cast<std::size_t>(path) * 2 + static_cast<std::size_t>(pol);
  }

  const Amplitudes& amplitudes() const { return amps_; }
  Amplitude amplitude(Path path, Polarization pol) const { return amps_[index(path, pol)]; }

  PolarizationVector branch(Path path) const {
    return {amplitude(path, Polarization::H), amplitude(path, Polarization::V)};
  }

  double norm_squared() const {
    double n = 0.0;
    for (const auto& a : amps_) n += std::norm(a);
    return n;
  }

  bool is_normalized(double tol = kNormTolerance) const {
    return std::abs(norm_squared() - 1.0) <= tol;
  }

 private:
  explicit PureState(const Amplitudes& amps) : amps_(amps) {}
  Amplitudes amps_;
};

inline Amplitude inner_product(const PureState& bra, const PureState& ket) {
  Amplitude sum{};
  for (std::size_t i = 0; i < 4; ++i) sum += std::conj(bra.amplitudes()[i]) * ket.amplitudes()[i];
  return sum;
}

/// True when a = e^{i theta} b for some theta, each amplitude within tol.
inline bool equivalent(const PureState& a, const PureState& b, double tol = kStateTolerance) {
  const Amplitude overlap = inner_product(b, a);
  const double mag = std::abs(overlap);
  if (mag < 0.5) return false;
  const Amplitude phase = overlap / mag;
  for (std::size_t i = 0; i < 4; ++i) {
    if (std::abs(a.amplitudes()[i] - phase * b.amplitudes()[i]) > tol) return false;
  }
  return true;
}

namespace detail {
inline void require_normalized(const PureState& s, std::string_view op) {
  if (!s.is_normalized()) {
    throw std::invalid_argument(std::string(op) + ": input state is not normalized");
  }
}

inline double snap_probability(double p) {
  if (p < kSnapTolerance) return 0.0;
  if (p > 1.0 - kSnapTolerance) return 1.0;
  return p;
}
}  // namespace detail

/// 50-50 beam splitter, U = (1/sqrt2)[[1,-1],[1,1]] on the path index:
/// |0> -> (|0>+|1>)/sqrt2, |1> -> (|1>-|0>)/sqrt2. Polarization untouched.
/// On the output side port 0 feeds D1 and port 1 feeds D2.
inline PureState apply_beam_splitter(const PureState& state) {
  detail::require_normalized(state, "apply_beam_splitter");
  constexpr double r = std::numbers::sqrt2 / 2;
  const auto& a = state.amplitudes();
  PureState::Amplitudes out{};
  for (std::size_t pol = 0; pol < 2; ++pol) {
    const Amplitude up = a[pol];
    const Amplitude low = a[2 + pol];
    out[pol] = r * (up - low);
    out[2 + pol] = r * (up + low);
  }
  return PureState::unchecked(out);
}

/// One switchable rotator: physical rotation of the polarization plane by
/// `angle` radians on one interferometer arm.
struct RotatorSetting {
  Path path;
  double angle;
};

/// H -> cos(phi) H + sin(phi) V, V -> -sin(phi) H + cos(phi) V.
inline PolarizationVector rotate(const PolarizationVector& pol, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * pol.h - s * pol.v, s * pol.h + c * pol.v};
}

/// Applies each setting to its arm. At most one setting per arm.
inline PureState apply_rotators(const PureState& state, std::span<const RotatorSetting> settings) {
  detail::require_normalized(state, "apply_rotators");
  bool seen[2] = {false, false};
  auto amps = state.amplitudes();
  for (const auto& setting : settings) {
    auto& flag = seen[static_cast<int>(setting.path)];
    if (flag) throw std::invalid_argument("apply_rotators: duplicate setting for one path");
    flag = true;
    const auto rotated = rotate(state.branch(setting.path), setting.angle);
    amps[PureState::index(setting.path, Polarization::H)] = rotated.h;
    amps[PureState::index(setting.path, Polarization::V)] = rotated.v;
  }
  return PureState::unchecked(amps);
}

inline PureState apply_rotators(const PureState& state, std::initializer_list<RotatorSetting> settings) {
  return apply_rotators(state, std::span<const RotatorSetting>(settings.begin(), settings.size()));
}

enum class Detector : int { D1 = 0, D2 = 1 };
enum class PolTag : int { plus45 = 0, minus45 = 1 };

struct DetectorDistribution {
  double d1 = 0.0;
  double d2 = 0.0;

  double of(Detector d) const { return d == Detector::D1 ? d1 : d2; }
};

/// Intensity (or probability) reaching each port after the beam splitter,
/// resolved into the +/-45 polarization basis. Indexed [port][PolTag].
using PortPolarizationDistribution = std::array<std::array<double, 2>, 2>;

inline PortPolarizationDistribution port_polarization_distribution(const PureState& field) {
  const PureState out = apply_beam_splitter(field);
  PortPolarizationDistribution dist{};
  for (int port = 0; port < 2; ++port) {
    const auto b = out.branch(static_cast<Path>(port));
    const Amplitude plus = std::conj(kPolPlus45.h) * b.h + std::conj(kPolPlus45.v) * b.v;
    const Amplitude minus = std::conj(kPolMinus45.h) * b.h + std::conj(kPolMinus45.v) * b.v;
    dist[port][0] = std::norm(plus);
    dist[port][1] = std::norm(minus);
  }
  return dist;
}

/// Field just before Bob's beam splitter -> marginal click probabilities.
inline DetectorDistribution detector_distribution(const PureState& state) {
  const PureState out = apply_beam_splitter(state);
  const double up = std::norm(out.amplitudes()[0]) + std::norm(out.amplitudes()[1]);
  const double p1 = detail::snap_probability(up);
  return {p1, detail::snap_probability(1.0 - p1)};
}

struct Detection {
  Detector detector = Detector::D1;
  std::optional<PolTag> pol;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Born-rule sample of the firing detector. In check mode the photon at the
/// firing port is additionally projected onto the {+45, -45} basis.
/// Draws one uniform for the port, and a second one only in check mode.
template <typename Engine>
Detection sample_detection(const PureState& state, Engine& rng, bool check_mode) {
  const auto dist = detector_distribution(state);
  Detection result;
  result.detector = uniform01(rng) < dist.d1 ? Detector::D1 : Detector::D2;
  if (check_mode) {
    const auto pp = port_polarization_distribution(state);
    const auto& at_port = pp[static_cast<int>(result.detector)];
    const double total = at_port[0] + at_port[1];
    const double p_plus = detail::snap_probability(at_port[0] / total);
    result.pol = uniform01(rng) < p_plus ? PolTag::plus45 : PolTag::minus45;
  }
  return result;
}

/// 2|det M| for the 2x2 path-by-polarization amplitude matrix M; 0 iff the
/// state is a product state, 1 for maximal entanglement.
inline double concurrence(const PureState& state) {
  detail::require_normalized(state, "concurrence");
  const auto& a = state.amplitudes();
  const double c = 2.0 * std::abs(a[0] * a[3] - a[1] * a[2]);
  return c < kSnapTolerance ? 0.0 : std::min(c, 1.0);
}

}  // namespace qerasure
