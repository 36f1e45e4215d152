#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <functional>
#include <optional>

#include "nanotrap/atom_cs.hpp"
#include "nanotrap/error.hpp"
#include "nanotrap/fiber_mode.hpp"

namespace nanotrap {

// ---------------------------------------------------------------------------
// Local polarisation
// ---------------------------------------------------------------------------

/// i (E x E*), real by construction. Written out because Eigen's cross()
/// conjugates the result for complex scalars.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> spin_density(const Eigen::Matrix<std::complex<Scalar>, 3, 1>& e) {
  // i (a b* - b a*) = -2 Im(a b*)
  auto term = [&](int j, int k) { return Scalar(-2) * std::imag(e(j) * std::conj(e(k))); };
  return {term(1, 2), term(2, 0), term(0, 1)};
}

/// Ellipticity vector i (E x E*) / |E|^2.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> ellipticity(const Eigen::Matrix<std::complex<Scalar>, 3, 1>& e) {
  const Scalar norm2 = e.squaredNorm();
  if (!(norm2 > Scalar(0))) throw Error(Errc::undefined_point, "ellipticity: zero field");
  return spin_density(e) / norm2;
}

/// Amplitudes (A+, A0, A-) of E in the spherical basis about `axis`, with
/// e_{+-1} = -+(e1 +- i e2)/sqrt2, e_0 = axis and A_q = e_q^* . E.
template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, 3, 1> spherical_components(const Eigen::Matrix<std::complex<Scalar>, 3, 1>& e,
                                                              const Eigen::Matrix<Scalar, 3, 1>& axis) {
  using Real3 = Eigen::Matrix<Scalar, 3, 1>;
  using Complex = std::complex<Scalar>;
  const Scalar length = axis.norm();
  if (!(length > Scalar(0))) throw Error(Errc::domain, "spherical_components: zero quantisation axis");
  const Real3 n = axis / length;
  const Real3 trial = std::abs(n.x()) < Scalar(0.9) ? Real3::UnitX() : Real3::UnitY();
  const Real3 e1 = (trial - trial.dot(n) * n).normalized();
  const Real3 e2 = n.cross(e1);
  const Complex i(0, 1);
  const Scalar inv_sqrt2 = Scalar(1) / std::sqrt(Scalar(2));
  const Eigen::Matrix<Complex, 3, 1> plus = -(e1.template cast<Complex>() + i * e2.template cast<Complex>()) * inv_sqrt2;
  const Eigen::Matrix<Complex, 3, 1> minus = (e1.template cast<Complex>() - i * e2.template cast<Complex>()) * inv_sqrt2;
  // dot() conjugates its first argument.
  return {plus.dot(e), n.template cast<Complex>().dot(e), minus.dot(e)};
}

// ---------------------------------------------------------------------------
// Light shifts
// ---------------------------------------------------------------------------

/// beta^(v) of B_fict = beta^(v) i (E x E*), G per (V/m)^2.
double fictitious_coefficient(const AtomicData& data, double wavelength, int F);

/// Fictitious magnetic field (G) of a local field envelope E (V/m).
Vec3 fictitious_field(const AtomicData& data, const CVec3& e, double wavelength, int F);

/// Scalar light shift -|E|^2 alpha_s / 4, Hz.
double scalar_shift(const AtomicData& data, const CVec3& e, double wavelength);

/// Vector light shift of a ground state about `axis`, Hz, from the vector
/// polarizability directly.
double vector_shift(const AtomicData& data, const CVec3& e, double wavelength, const HyperfineState& state,
                    const Vec3& axis);

// ---------------------------------------------------------------------------
// Trap assembly
// ---------------------------------------------------------------------------

/// A beam with its atomic response cached for the trap evaluators.
struct BeamTerm {
  LightField field;
  double scalar_polarizability = 0.0;     // SI
  std::array<double, 2> beta_vector{};    // G/(V/m)^2 for F = 3, 4

  double beta(int F) const { return beta_vector.at(F - 3); }
};

BeamTerm make_beam(const AtomicData& data, const LightField& field);

struct TrapConfig {
  FiberSpec fiber;
  BeamTerm blue;
  BeamTerm red;
  std::optional<BeamTerm> manipulation;
  double c3 = 0.0;  // J m^3, 0 disables the surface term
};

/// Physical trap parameters; angles in radians, powers in W, lengths in m.
struct TrapParameters {
  double radius = 250e-9;
  double blue_wavelength = 783e-9;
  double blue_power = 8.5e-3;
  double phi_b = 0.0;               // blue polarisation sits at 90 deg + phi_b
  double red_wavelength = 1064e-9;
  double red_power = 0.77e-3;       // forward beam
  double red_imbalance = 1.0;       // backward / forward power
  double red_phase = 0.0;
  bool surface_potential = true;

  struct Manipulation {
    double wavelength = 0.0;
    double power = 0.0;
    double polarization_angle = 0.0;
    Direction direction = Direction::forward;
  };
  std::optional<Manipulation> manipulation;
};

TrapConfig build_trap(const AtomicData& data, const TrapParameters& params);

/// Scalar shift sum and total fictitious field of all beams at a point.
struct LocalShift {
  double scalar = 0.0;   // Hz
  Vec3 fictitious = Vec3::Zero();  // G
};
LocalShift local_shift(const TrapConfig& config, const Cylindrical& position, int F);

/// Trap energy (Hz) of a ground state: scalar shifts, Breit-Rabi energy at
/// |Boff + B_fict| relative to zero field, and -C3/(r - a)^3.
double trap_potential(const AtomicData& data, const TrapConfig& config, const Cylindrical& position,
                      const HyperfineState& state, const Vec3& offset_field);

/// trap_potential averaged over the mF sublevels of manifold F.
double averaged_potential(const AtomicData& data, const TrapConfig& config, const Cylindrical& position, int F,
                          const Vec3& offset_field);

enum class Site { upper, lower };  // phi = 0 and phi = pi in plane P

using Potential = std::function<double(const Cylindrical&)>;

/// Local minimum of `potential` near the site: radial scan at the red
/// antinode, then coordinate-wise golden-section refinement to 0.1 nm.
Cylindrical find_trap_minimum(const Potential& potential, const TrapConfig& config, Site site = Site::upper);
Cylindrical find_trap_minimum(const AtomicData& data, const TrapConfig& config, const HyperfineState& state,
                              const Vec3& offset_field, Site site = Site::upper);

struct TrapFrequencies {
  double radial = 0.0;
  double azimuthal = 0.0;
  double axial = 0.0;
};

/// Harmonic frequencies (Hz) from the Hessian in the local (r, phi, z) frame,
/// central differences with `step` (m).
TrapFrequencies trap_frequencies(const Potential& potential, const Cylindrical& minimum, double mass,
                                 double step = 1e-9);
TrapFrequencies trap_frequencies(const AtomicData& data, const TrapConfig& config, const HyperfineState& state,
                                 const Vec3& offset_field, Site site = Site::upper);

// ---------------------------------------------------------------------------
// Per-site magnetic environment
// ---------------------------------------------------------------------------

struct MagneticEnvironment {
  Vec3 offset_field = Vec3::Zero();     // G
  Vec3 fictitious_upper = Vec3::Zero(); // G
  Vec3 fictitious_lower = Vec3::Zero(); // G
  Cylindrical upper_site;
  Cylindrical lower_site;

  Vec3 total_upper() const { return offset_field + fictitious_upper; }
  Vec3 total_lower() const { return offset_field + fictitious_lower; }
};

/// Fictitious fields of all beams at the two minima of the mF-averaged F = 4
/// potential.
MagneticEnvironment site_fields(const AtomicData& data, const TrapConfig& config, const Vec3& offset_field);

/// Environment with prescribed fictitious fields, no trap evaluation.
MagneticEnvironment prescribed_environment(const Vec3& offset_field, const Vec3& fictitious_upper,
                                           const Vec3& fictitious_lower);

struct ClockSplitting {
  double exact = 0.0;        // nu_clock(upper) - nu_clock(lower), Hz
  double approximate = 0.0;  // 2 alpha0 Boff.(Bfict_upper - Bfict_lower), Hz
  double upper_shift = 0.0;  // relative to the Bfict = 0 clock frequency
  double lower_shift = 0.0;
};

ClockSplitting clock_splitting(const AtomicData& data, const MagneticEnvironment& env);

/// Upper-site minus lower-site frequency of |3, mF> -> |4, mF'>, Hz.
double mw_splitting(const AtomicData& data, const MagneticEnvironment& env, const HyperfineState& lower,
                    const HyperfineState& upper);

}  // namespace nanotrap
