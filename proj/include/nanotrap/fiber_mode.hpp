#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <iosfwd>
#include <vector>

namespace nanotrap {

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;

/// Three-term Sellmeier dispersion, n^2 = 1 + sum B_i l^2 / (l^2 - C_i^2), l in um.
struct SellmeierModel {
  std::array<double, 3> b{};
  std::array<double, 3> c_um{};
  double min_wavelength_um = 0.4;
  double max_wavelength_um = 1.5;
};

/// Refractive index at a vacuum wavelength (m). Throws Errc::domain outside
/// the model's validity range.
double refractive_index(const SellmeierModel& model, double wavelength);

struct FiberSpec {
  double radius = 0.0;  // m
  SellmeierModel core;
  double exterior_index = 1.0;

  double core_index(double wavelength) const { return refractive_index(core, wavelength); }
};

double v_number(const FiberSpec& fiber, double wavelength);

/// Cutoff of the first higher-order modes (TE01/TM01/HE21), first zero of J0.
inline constexpr double single_mode_cutoff = 2.404825557695773;

/// Solved HE11 eigenmode. `normalization` is the amplitude constant of the
/// circular-basis field that carries 1 W of guided power.
struct GuidedMode {
  double wavelength = 0.0;           // m
  double radius = 0.0;               // m
  double core_index = 0.0;
  double exterior_index = 1.0;
  double beta = 0.0;                 // rad/m
  double interior_parameter = 0.0;   // h, 1/m
  double exterior_parameter = 0.0;   // q, 1/m
  double hybrid_parameter = 0.0;     // s of the HE11 field expressions
  double normalization = 0.0;        // V/m per sqrt(W)
  bool multimode = false;            // V above the second-mode cutoff

  double wavenumber() const;
  double effective_index() const { return beta / wavenumber(); }
  bool solved() const { return beta > 0.0 && normalization > 0.0; }
};

/// HE11 characteristic function of the step-index fiber, evaluated at an
/// effective index strictly between the exterior and core indices. Its zero
/// in that interval is the HE11 propagation constant.
double he11_characteristic(const FiberSpec& fiber, double wavelength, double effective_index);

/// Solve the exact HE11 eigenvalue equation: grid scan of the effective index
/// (spacing 1e-4) followed by bracketed refinement to 1e-12.
GuidedMode solve_he11(const FiberSpec& fiber, double wavelength);

/// Cylindrical components (e_r, e_phi, e_z) and de_z/dr of the circularly
/// polarised HE11 mode (rotation index +1, forward) at unit amplitude.
struct RadialProfile {
  std::complex<double> e_r, e_phi, e_z, de_z_dr;
};
RadialProfile he11_profile(const GuidedMode& mode, double r);

/// Axial Poynting flux of the unit-amplitude circular mode integrated over the
/// cross-section (W per unit amplitude^2).
double he11_power_per_amplitude(const GuidedMode& mode);

enum class Direction { forward = 1, backward = -1 };

enum class Configuration { running, standing };

/// A beam (or counter-propagating beam pair) in the fiber. Polarisation angle
/// is the transverse principal axis measured from the x axis (plane P, which
/// contains the atoms; the fiber axis is z).
struct LightField {
  GuidedMode mode;
  double power = 0.0;               // W; running: the beam, standing: forward beam
  double polarization_angle = 0.0;  // rad
  Direction direction = Direction::forward;
  Configuration configuration = Configuration::running;
  double counter_power = 0.0;       // W; standing only, backward beam
  double relative_phase = 0.0;      // rad; standing only, phase of the backward beam at z = 0

  static LightField running(const GuidedMode& mode, double power, double polarization_angle,
                            Direction direction = Direction::forward);
  static LightField standing(const GuidedMode& mode, double forward_power, double backward_power,
                             double polarization_angle, double relative_phase = 0.0);
};

struct Cylindrical {
  double r = 0.0;
  double phi = 0.0;
  double z = 0.0;

  Vec3 cartesian() const;
  static Cylindrical from_cartesian(const Vec3& p);
};

/// Positive-frequency envelope E (V/m), Cartesian components, of a
/// quasi-linearly polarised HE11 field. The global phase makes the dominant
/// transverse component real and positive at (r = a, phi = angle, z = 0).
CVec3 field_at(const LightField& field, const Cylindrical& position);

/// Unit-power quasi-linear field of a single beam.
CVec3 quasi_linear_field(const GuidedMode& mode, double polarization_angle, Direction direction,
                         const Cylindrical& position);

struct PolarGrid {
  double r_min = 0.0;
  double r_max = 0.0;
  int r_points = 1;
  int phi_points = 1;  // phi_k = 2 pi k / phi_points
  double z = 0.0;

  double r_at(int i) const;
  double phi_at(int k) const;
};

/// |E|^2 sampled on the grid, rows = r (outer), columns = phi (inner), (V/m)^2.
Eigen::MatrixXd intensity_map(const LightField& field, const PolarGrid& grid);

struct FieldSample {
  Cylindrical position;
  CVec3 field;
};

std::vector<FieldSample> field_map(const LightField& field, const PolarGrid& grid);

/// CSV with header r_m, phi_rad, z_m, Ex_re, Ex_im, Ey_re, Ey_im, Ez_re, Ez_im.
void write_field_csv(std::ostream& out, const std::vector<FieldSample>& samples);

}  // namespace nanotrap
