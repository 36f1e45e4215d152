#pragma once

#include <Eigen/Dense>

#include "nanotrap/atom_cs.hpp"
#include "nanotrap/fiber_mode.hpp"

namespace nanotrap {

/// Level ordering of the F = 4 -> F' = 5 system: ground mF = -4..4 at
/// indices 0..8, excited mF' = -5..5 at 9..19.
inline constexpr int ground_levels = 9;
inline constexpr int excited_levels = 11;
inline constexpr int pump_levels = ground_levels + excited_levels;

inline constexpr int ground_index(int mF) { return mF + 4; }
inline constexpr int excited_index(int mF) { return ground_levels + mF + 5; }

/// Sublevel populations. `ground` always holds the nine F = 4 entries;
/// `excited` is empty for adiabatically eliminated results.
struct PopulationVector {
  Eigen::VectorXd ground;
  Eigen::VectorXd excited;

  static PopulationVector uniform();
  static PopulationVector stretched(int sign);  // all population in mF = +-4
  static PopulationVector from_levels(const Eigen::VectorXd& levels);

  Eigen::VectorXd levels() const;  // ground then excited (zero-filled)
  double total() const;
  double at(int mF) const { return ground(ground_index(mF)); }
  /// Ground populations renormalised to unit sum.
  Eigen::VectorXd ground_distribution() const;
  /// Throws Errc::domain unless entries are >= -1e-12 and sum to 1 within 1e-9.
  void validate() const;
};

/// Intensity fractions (|A+|^2, |A0|^2, |A-|^2) / |E|^2 of the pumping light.
struct PolarizationFractions {
  double plus = 0.0;
  double pi = 0.0;
  double minus = 0.0;

  static PolarizationFractions from_field(const CVec3& e, const Vec3& axis);
  PolarizationFractions mirrored() const { return {minus, pi, plus}; }
};

/// Generator M of dP/dt = M P on the 20 levels: polarisation-weighted
/// excitation and stimulated emission at (Gamma/2) s strength, spontaneous
/// decay at Gamma strength. Columns sum to zero.
Eigen::MatrixXd pump_rates(const AtomicData& data, const PolarizationFractions& fractions, double saturation);

/// Ground-manifold generator after eliminating the excited states (Schur complement).
Eigen::MatrixXd effective_ground_generator(const Eigen::MatrixXd& rates);

/// Normalised null vector of the effective ground generator by shifted
/// inverse (resolvent) iteration to 1e-12.
PopulationVector pump_steady_state(const Eigen::MatrixXd& rates);

/// Steady state of the full 20-level system (ground and excited).
PopulationVector full_steady_state(const Eigen::MatrixXd& rates);

/// exp(M t) P0 by adaptive RK4 with step doubling, relative error 1e-9.
PopulationVector pump_evolution(const Eigen::MatrixXd& rates, const PopulationVector& initial, double duration);

/// Time for the deficit of the dominant steady-state sublevel to fall to 1/e
/// of its initial value, starting from `initial`.
double pumping_time(const Eigen::MatrixXd& rates, const PopulationVector& initial);

/// Photon scattering rate (1/s) of |4, mF> on |5', mF + q>, detuning in Hz
/// from the shifted resonance.
double scattering_rate(const AtomicData& data, const HyperfineState& state, int q, double detuning,
                       double saturation);

struct PulseSpec {
  double rabi_frequency = 0.0;  // rad/s
  double duration = 0.0;        // s
  double detuning = 0.0;        // Hz

  static PulseSpec pi_pulse(double duration, double detuning = 0.0);
};

/// Square-pulse transfer probability of a two-level transition.
double rabi_transfer(const PulseSpec& pulse);

/// FWHM (Hz) of rabi_transfer versus detuning for a pi pulse of length `duration`.
double pi_pulse_fwhm(double duration);

}  // namespace nanotrap
