#pragma once

#include <filesystem>
#include <iosfwd>

#include "nanotrap/fiber_mode.hpp"

namespace nanotrap {

enum class Manifold { ground, excited };  // 6S1/2, 6P3/2

struct HyperfineState {
  Manifold manifold = Manifold::ground;
  int F = 4;
  int mF = 0;

  static HyperfineState ground(int F, int mF) { return {Manifold::ground, F, mF}; }
  static HyperfineState excited(int F, int mF) { return {Manifold::excited, F, mF}; }

  /// Throws Errc::domain unless |mF| <= F and F belongs to the manifold.
  void validate() const;
};

struct OpticalLine {
  double frequency = 0.0;          // Hz
  double linewidth = 0.0;          // Hz, Gamma / 2 pi
  double reduced_dipole_ea0 = 0.0; // <J=1/2||er||J'>, ground-referenced convention
  double upper_j = 0.5;

  double angular_frequency() const;
  double decay_rate() const;       // Gamma, 1/s
  /// |<J'||d||J>|^2 in the Edmonds convention, (C m)^2.
  double dipole_squared() const;
  /// Decay rate implied by the stored dipole element (consistency check).
  double decay_rate_from_dipole() const;
};

/// Cesium constants plus the silica dispersion, loaded from the bundled data
/// file. Immutable after load.
struct AtomicData {
  int format_version = 0;
  double nuclear_spin = 3.5;
  double ground_hyperfine_splitting = 0.0;  // Hz
  double g_j_ground = 0.0;
  double g_i = 0.0;
  double bohr_magneton = 0.0;               // Hz/G
  double mass = 0.0;                        // kg
  double g_j_d2_excited = 0.0;
  OpticalLine d1;
  OpticalLine d2;
  double c3_surface = 0.0;                  // Hz um^3
  SellmeierModel silica;

  double c3_si() const;                     // J m^3
};

AtomicData parse_atomic_data(std::istream& in);
AtomicData load_atomic_data(const std::filesystem::path& path);
std::filesystem::path default_atomic_data_path();

/// Landé g_F of a hyperfine level (ground uses g_J(6S1/2), excited g_J(6P3/2)).
double g_factor(const AtomicData& data, Manifold manifold, int F);

/// Quadratic clock-shift coefficient (g_J - g_I)^2 muB^2 / (2 h dE_hfs), Hz/G^2.
double clock_coefficient(const AtomicData& data);

/// Exact ground-state energy (Hz, relative to the fine-structure centroid) at
/// field magnitude B (G). The sign of B is the field direction along the
/// quantisation axis.
double breit_rabi_energy(const AtomicData& data, const HyperfineState& state, double field_gauss);

/// Linear Zeeman shift g_F' mF' muB B of an excited 6P3/2 level, |B| <= 50 G.
double zeeman_shift_excited(const AtomicData& data, const HyperfineState& state, double field_gauss);

/// Shift (Hz) of a D2 transition frequency relative to its zero-field value.
double optical_transition_shift(const AtomicData& data, const HyperfineState& ground,
                                const HyperfineState& excited, double field_gauss);

/// Ground-state hyperfine transition |3, mF> -> |4, mF'> frequency (Hz).
double mw_transition_frequency(const AtomicData& data, const HyperfineState& lower,
                               const HyperfineState& upper, double field_gauss);

/// Relative D2 strength of |F, mF> -> |F', mF + q>, normalised so that the
/// cycling transition |4, 4> -> |5', 5'> equals one.
double transition_strength(const AtomicData& data, const HyperfineState& ground, int q,
                           const HyperfineState& excited);

/// Two-line (D1 + D2) dynamic scalar polarizability of the ground state, SI.
double scalar_polarizability(const AtomicData& data, double wavelength, Manifold manifold = Manifold::ground);

/// Two-line dynamic vector polarizability of the 6S1/2 F manifold, SI.
double vector_polarizability(const AtomicData& data, double wavelength, int F);

/// Wavelength in [lo, hi] where the scalar polarizability vanishes.
double tune_out(const AtomicData& data, double lo, double hi);

}  // namespace nanotrap
