#include "nanotrap/light_matter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "nanotrap/constants.hpp"
#include "nanotrap/numerics.hpp"

namespace nanotrap {

using constants::pi;

double fictitious_coefficient(const AtomicData& data, double wavelength, int F) {
  const double alpha_v = vector_polarizability(data, wavelength, F);
  const double mu_b = constants::h * data.bohr_magneton;  // J/G
  return -alpha_v / (8.0 * F * g_factor(data, Manifold::ground, F) * mu_b);
}

Vec3 fictitious_field(const AtomicData& data, const CVec3& e, double wavelength, int F) {
  return fictitious_coefficient(data, wavelength, F) * spin_density(e);
}

double scalar_shift(const AtomicData& data, const CVec3& e, double wavelength) {
  return -0.25 * scalar_polarizability(data, wavelength) * e.squaredNorm() / constants::h;
}

double vector_shift(const AtomicData& data, const CVec3& e, double wavelength, const HyperfineState& state,
                    const Vec3& axis) {
  if (state.manifold != Manifold::ground) throw Error(Errc::domain, "vector_shift: ground state expected");
  state.validate();
  const double length = axis.norm();
  if (!(length > 0.0)) throw Error(Errc::domain, "vector_shift: zero quantisation axis");
  const double alpha_v = vector_polarizability(data, wavelength, state.F);
  const double projection = spin_density(e).dot(axis) / length;
  return -alpha_v * state.mF * projection / (8.0 * state.F * constants::h);
}

BeamTerm make_beam(const AtomicData& data, const LightField& field) {
  BeamTerm term;
  term.field = field;
  term.scalar_polarizability = scalar_polarizability(data, field.mode.wavelength);
  term.beta_vector = {fictitious_coefficient(data, field.mode.wavelength, 3),
                      fictitious_coefficient(data, field.mode.wavelength, 4)};
  return term;
}

TrapConfig build_trap(const AtomicData& data, const TrapParameters& params) {
  if (!(params.radius > 0.0)) throw Error(Errc::domain, "build_trap: fiber radius must be positive");
  if (!(params.red_imbalance >= 0.0)) throw Error(Errc::domain, "build_trap: red imbalance must be non-negative");
  TrapConfig config;
  config.fiber = FiberSpec{params.radius, data.silica, 1.0};
  const GuidedMode blue = solve_he11(config.fiber, params.blue_wavelength);
  const GuidedMode red = solve_he11(config.fiber, params.red_wavelength);
  config.blue = make_beam(data, LightField::running(blue, params.blue_power, 0.5 * pi + params.phi_b));
  config.red = make_beam(data, LightField::standing(red, params.red_power, params.red_power * params.red_imbalance,
                                                    0.0, params.red_phase));
  if (params.manipulation) {
    const auto& m = *params.manipulation;
    const GuidedMode mode = solve_he11(config.fiber, m.wavelength);
    config.manipulation = make_beam(data, LightField::running(mode, m.power, m.polarization_angle, m.direction));
  }
  config.c3 = params.surface_potential ? data.c3_si() : 0.0;
  return config;
}

LocalShift local_shift(const TrapConfig& config, const Cylindrical& position, int F) {
  LocalShift out;
  auto add = [&](const BeamTerm& beam) {
    const CVec3 e = field_at(beam.field, position);
    out.scalar += -0.25 * beam.scalar_polarizability * e.squaredNorm() / constants::h;
    out.fictitious += beam.beta(F) * spin_density(e);
  };
  add(config.blue);
  add(config.red);
  if (config.manipulation) add(*config.manipulation);
  return out;
}

namespace {

void check_outside(const TrapConfig& config, const Cylindrical& position) {
  if (!(position.r > config.fiber.radius))
    throw Error(Errc::domain, "trap_potential: position inside the fiber");
}

double surface_term(const TrapConfig& config, double r) {
  if (config.c3 == 0.0) return 0.0;
  const double d = r - config.fiber.radius;
  return -config.c3 / (d * d * d) / constants::h;
}

double zeeman_energy(const AtomicData& data, const HyperfineState& state, double field) {
  return breit_rabi_energy(data, state, field) - breit_rabi_energy(data, state, 0.0);
}

}  // namespace

double trap_potential(const AtomicData& data, const TrapConfig& config, const Cylindrical& position,
                      const HyperfineState& state, const Vec3& offset_field) {
  check_outside(config, position);
  state.validate();
  const LocalShift shift = local_shift(config, position, state.F);
  const double field = (offset_field + shift.fictitious).norm();
  return shift.scalar + zeeman_energy(data, state, field) + surface_term(config, position.r);
}

double averaged_potential(const AtomicData& data, const TrapConfig& config, const Cylindrical& position, int F,
                          const Vec3& offset_field) {
  check_outside(config, position);
  HyperfineState::ground(F, 0).validate();
  const LocalShift shift = local_shift(config, position, F);
  const double field = (offset_field + shift.fictitious).norm();
  double zeeman = 0.0;
  for (int m = -F; m <= F; ++m) zeeman += zeeman_energy(data, HyperfineState::ground(F, m), field);
  return shift.scalar + zeeman / (2 * F + 1) + surface_term(config, position.r);
}

// ---------------------------------------------------------------------------
// Minimum search
// ---------------------------------------------------------------------------

namespace {

double antinode(const TrapConfig& config) {
  const LightField& red = config.red.field;
  if (red.configuration != Configuration::standing) return 0.0;
  return red.relative_phase / (2.0 * red.mode.beta);
}

}  // namespace

Cylindrical find_trap_minimum(const Potential& potential, const TrapConfig& config, Site site) {
  const double a = config.fiber.radius;
  const double phi0 = site == Site::upper ? 0.0 : pi;
  const double z0 = antinode(config);

  constexpr double scan_start = 20e-9, scan_end = 1000e-9, scan_step = 5e-9;
  std::vector<double> rs, us;
  for (double d = scan_start; d <= scan_end + 1e-15; d += scan_step) {
    rs.push_back(a + d);
    us.push_back(potential({a + d, phi0, z0}));
  }
  int best = -1;
  for (std::size_t i = 1; i + 1 < us.size(); ++i)
    if (us[i] < us[i - 1] && us[i] <= us[i + 1] && (best < 0 || us[i] < us[static_cast<std::size_t>(best)]))
      best = static_cast<int>(i);
  if (best < 0) throw Error(Errc::no_trap, "find_trap_minimum: no bound radial minimum between 20 nm and 1 um");

  Cylindrical p{rs[static_cast<std::size_t>(best)], phi0, z0};
  double w_r = 2.0 * scan_step, w_arc = 100e-9, w_z = 100e-9;
  // Sweeps continue well below the 0.1 nm contract so that mirror-image
  // sites agree to round-off.
  constexpr double tol = 1e-14, converged = 1e-13;
  for (int sweep = 0; sweep < 200; ++sweep) {
    const Cylindrical start = p;
    const double r_lo = std::max(p.r - w_r, a + 0.5 * scan_start);
    p.r = golden_section_minimize([&](double r) { return potential({r, p.phi, p.z}); }, r_lo, p.r + w_r, tol);
    const double w_phi = w_arc / p.r;
    p.phi = golden_section_minimize([&](double f) { return potential({p.r, f, p.z}); }, p.phi - w_phi,
                                    p.phi + w_phi, tol / p.r);
    p.z = golden_section_minimize([&](double z) { return potential({p.r, p.phi, z}); }, p.z - w_z, p.z + w_z, tol);
    const double moved_r = std::abs(p.r - start.r);
    const double moved_arc = p.r * std::abs(p.phi - start.phi);
    const double moved_z = std::abs(p.z - start.z);
    if (sweep > 0 && std::max({moved_r, moved_arc, moved_z}) < converged) return p;
    w_r = std::max(3.0 * moved_r, 1e-11);
    w_arc = std::max(3.0 * moved_arc, 1e-11);
    w_z = std::max(3.0 * moved_z, 1e-11);
  }
  throw Error(Errc::no_trap, "find_trap_minimum: coordinate search did not converge");
}

Cylindrical find_trap_minimum(const AtomicData& data, const TrapConfig& config, const HyperfineState& state,
                              const Vec3& offset_field, Site site) {
  const Potential u = [&](const Cylindrical& p) { return trap_potential(data, config, p, state, offset_field); };
  return find_trap_minimum(u, config, site);
}

TrapFrequencies trap_frequencies(const Potential& potential, const Cylindrical& minimum, double mass, double step) {
  const Vec3 origin = minimum.cartesian();
  Eigen::Matrix3d frame;  // columns: r, phi, z unit vectors
  frame.col(0) = Vec3(std::cos(minimum.phi), std::sin(minimum.phi), 0.0);
  frame.col(1) = Vec3(-std::sin(minimum.phi), std::cos(minimum.phi), 0.0);
  frame.col(2) = Vec3::UnitZ();
  auto energy = [&](const Eigen::Vector3d& local) {
    return constants::h * potential(Cylindrical::from_cartesian(origin + frame * local));
  };
  Eigen::Matrix3d hessian;
  const double u0 = energy(Vec3::Zero());
  for (int i = 0; i < 3; ++i) {
    const Vec3 di = step * Vec3::Unit(i);
    hessian(i, i) = (energy(di) - 2.0 * u0 + energy(-di)) / (step * step);
    for (int j = 0; j < i; ++j) {
      const Vec3 dj = step * Vec3::Unit(j);
      hessian(i, j) = hessian(j, i) =
          (energy(di + dj) - energy(di - dj) - energy(-di + dj) + energy(-di - dj)) / (4.0 * step * step);
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(hessian);
  const Vec3 curvatures = solver.eigenvalues();
  if (!(curvatures.minCoeff() > 0.0)) throw Error(Errc::saddle, "trap_frequencies: Hessian is not positive definite");
  std::array<double, 3> nu{};
  std::array<bool, 3> taken{};
  for (int k = 0; k < 3; ++k) {
    int axis = 0;
    solver.eigenvectors().col(k).cwiseAbs().maxCoeff(&axis);
    if (taken[static_cast<std::size_t>(axis)]) axis = k;
    taken[static_cast<std::size_t>(axis)] = true;
    nu[static_cast<std::size_t>(axis)] = std::sqrt(curvatures(k) / mass) / (2.0 * pi);
  }
  return {nu[0], nu[1], nu[2]};
}

TrapFrequencies trap_frequencies(const AtomicData& data, const TrapConfig& config, const HyperfineState& state,
                                 const Vec3& offset_field, Site site) {
  const Potential u = [&](const Cylindrical& p) { return trap_potential(data, config, p, state, offset_field); };
  return trap_frequencies(u, find_trap_minimum(u, config, site), data.mass);
}

// ---------------------------------------------------------------------------
// Site fields and splittings
// ---------------------------------------------------------------------------

MagneticEnvironment site_fields(const AtomicData& data, const TrapConfig& config, const Vec3& offset_field) {
  constexpr int F = 4;
  const Potential u = [&](const Cylindrical& p) { return averaged_potential(data, config, p, F, offset_field); };
  MagneticEnvironment env;
  env.offset_field = offset_field;
  env.upper_site = find_trap_minimum(u, config, Site::upper);
  env.lower_site = find_trap_minimum(u, config, Site::lower);
  env.fictitious_upper = local_shift(config, env.upper_site, F).fictitious;
  env.fictitious_lower = local_shift(config, env.lower_site, F).fictitious;
  return env;
}

MagneticEnvironment prescribed_environment(const Vec3& offset_field, const Vec3& fictitious_upper,
                                           const Vec3& fictitious_lower) {
  MagneticEnvironment env;
  env.offset_field = offset_field;
  env.fictitious_upper = fictitious_upper;
  env.fictitious_lower = fictitious_lower;
  return env;
}

namespace {

double clock_frequency(const AtomicData& data, double field) {
  return breit_rabi_energy(data, HyperfineState::ground(4, 0), field) -
         breit_rabi_energy(data, HyperfineState::ground(3, 0), field);
}

}  // namespace

ClockSplitting clock_splitting(const AtomicData& data, const MagneticEnvironment& env) {
  const double reference = clock_frequency(data, env.offset_field.norm());
  ClockSplitting out;
  out.upper_shift = clock_frequency(data, env.total_upper().norm()) - reference;
  out.lower_shift = clock_frequency(data, env.total_lower().norm()) - reference;
  out.exact = out.upper_shift - out.lower_shift;
  out.approximate =
      2.0 * clock_coefficient(data) * env.offset_field.dot(env.fictitious_upper - env.fictitious_lower);
  return out;
}

double mw_splitting(const AtomicData& data, const MagneticEnvironment& env, const HyperfineState& lower,
                    const HyperfineState& upper) {
  return mw_transition_frequency(data, lower, upper, env.total_upper().norm()) -
         mw_transition_frequency(data, lower, upper, env.total_lower().norm());
}

}  // namespace nanotrap
