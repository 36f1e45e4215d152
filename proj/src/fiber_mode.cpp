#include "nanotrap/fiber_mode.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "nanotrap/constants.hpp"
#include "nanotrap/error.hpp"
#include "nanotrap/numerics.hpp"

namespace nanotrap {

using namespace std::complex_literals;
using constants::pi;

double refractive_index(const SellmeierModel& model, double wavelength) {
  const double l_um = wavelength * 1e6;
  if (!(l_um >= model.min_wavelength_um && l_um <= model.max_wavelength_um))
    throw Error(Errc::domain, "refractive_index: wavelength " + std::to_string(l_um) +
                                  " um outside the Sellmeier validity range");
  const double l2 = l_um * l_um;
  double n2 = 1.0;
  for (std::size_t i = 0; i < 3; ++i) n2 += model.b[i] * l2 / (l2 - model.c_um[i] * model.c_um[i]);
  return std::sqrt(n2);
}

double v_number(const FiberSpec& fiber, double wavelength) {
  const double n1 = fiber.core_index(wavelength);
  const double n2 = fiber.exterior_index;
  return 2.0 * pi * fiber.radius / wavelength * std::sqrt(n1 * n1 - n2 * n2);
}

double GuidedMode::wavenumber() const { return 2.0 * pi / wavelength; }

namespace {

struct Transverse {
  double k, h, q, u, w;
};

Transverse transverse(double radius, double wavelength, double n1, double n2, double neff) {
  const double k = 2.0 * pi / wavelength;
  const double beta = neff * k;
  const double h = std::sqrt((k * n1) * (k * n1) - beta * beta);
  const double q = std::sqrt(beta * beta - (k * n2) * (k * n2));
  return {k, h, q, h * radius, q * radius};
}

// J1'(u)/(u J1(u)) and K1'(w)/(w K1(w)).
double j_ratio(double u) { return bessel_j_prime(1, u) / (u * bessel_j(1, u)); }
double k_ratio(double w) { return bessel_k_prime(1, w) / (w * bessel_k(1, w)); }

double characteristic(double n1, double n2, double neff, const Transverse& t) {
  const double jr = j_ratio(t.u), kr = k_ratio(t.w);
  const double rhs = 1.0 / (t.u * t.u) + 1.0 / (t.w * t.w);
  return (jr + kr) * (n1 * n1 * jr + n2 * n2 * kr) - neff * neff * rhs * rhs;
}

}  // namespace

double he11_characteristic(const FiberSpec& fiber, double wavelength, double effective_index) {
  const double n1 = fiber.core_index(wavelength), n2 = fiber.exterior_index;
  if (!(effective_index > n2 && effective_index < n1))
    throw Error(Errc::domain, "he11_characteristic: effective index outside the guidance interval");
  return characteristic(n1, n2, effective_index, transverse(fiber.radius, wavelength, n1, n2, effective_index));
}

GuidedMode solve_he11(const FiberSpec& fiber, double wavelength) {
  if (!(fiber.radius > 0.0)) throw Error(Errc::domain, "solve_he11: fiber radius must be positive");
  const double n1 = fiber.core_index(wavelength), n2 = fiber.exterior_index;
  if (!(n1 > n2)) throw Error(Errc::domain, "solve_he11: core index must exceed exterior index");
  auto f = [&](double neff) { return characteristic(n1, n2, neff, transverse(fiber.radius, wavelength, n1, n2, neff)); };

  // Scan from the core index downwards; the first genuine sign change is the
  // fundamental (largest effective index) root. Poles of the J ratio also flip
  // sign, so candidate roots must have a small residual relative to the cell.
  constexpr double grid = 1e-4;
  double hi = n1 - 0.5 * grid;
  double f_hi = f(hi);
  bool found = false;
  double root = 0.0;
  for (double lo = hi - grid; lo > n2; lo -= grid) {
    const double f_lo = f(lo);
    if (std::isfinite(f_lo) && std::isfinite(f_hi) && (f_lo > 0.0) != (f_hi > 0.0)) {
      const double x = find_root(f, lo, hi, 1e-12);
      const double scale = std::max(std::abs(f_lo), std::abs(f_hi));
      if (std::abs(f(x)) < 1e-6 * scale) {
        root = x;
        found = true;
        break;
      }
    }
    hi = lo;
    f_hi = f_lo;
  }
  if (!found) throw Error(Errc::no_mode, "solve_he11: no HE11 root in the guidance interval");

  const Transverse t = transverse(fiber.radius, wavelength, n1, n2, root);
  GuidedMode mode;
  mode.wavelength = wavelength;
  mode.radius = fiber.radius;
  mode.core_index = n1;
  mode.exterior_index = n2;
  mode.beta = root * t.k;
  mode.interior_parameter = t.h;
  mode.exterior_parameter = t.q;
  mode.hybrid_parameter = (1.0 / (t.u * t.u) + 1.0 / (t.w * t.w)) / (j_ratio(t.u) + k_ratio(t.w));
  mode.multimode = v_number(fiber, wavelength) > single_mode_cutoff;
  mode.normalization = 1.0;
  mode.normalization = 1.0 / std::sqrt(he11_power_per_amplitude(mode));
  return mode;
}

RadialProfile he11_profile(const GuidedMode& mode, double r) {
  const double a = mode.radius, b = mode.beta, h = mode.interior_parameter, q = mode.exterior_parameter;
  const double s = mode.hybrid_parameter;
  RadialProfile p;
  if (r < a) {
    const double j0 = bessel_j(0, h * r), j1 = bessel_j(1, h * r), j2 = bessel_j(2, h * r);
    p.e_r = 1i * b / (2.0 * h) * ((1.0 - s) * j0 - (1.0 + s) * j2);
    p.e_phi = -b / (2.0 * h) * ((1.0 - s) * j0 + (1.0 + s) * j2);
    p.e_z = j1;
    p.de_z_dr = h * bessel_j_prime(1, h * r);
  } else {
    const double ratio = bessel_j(1, h * a) / bessel_k(1, q * a);
    const double k0 = bessel_k(0, q * r), k1 = bessel_k(1, q * r), k2 = bessel_k(2, q * r);
    p.e_r = 1i * b / (2.0 * q) * ratio * ((1.0 - s) * k0 + (1.0 + s) * k2);
    p.e_phi = -b / (2.0 * q) * ratio * ((1.0 - s) * k0 - (1.0 + s) * k2);
    p.e_z = ratio * k1;
    p.de_z_dr = ratio * q * bessel_k_prime(1, q * r);
  }
  return p;
}

double he11_power_per_amplitude(const GuidedMode& mode) {
  // H_r and H_phi follow from curl E = i w mu0 H for the exp(i(beta z + phi)) mode.
  const double omega = constants::c * mode.wavenumber();
  auto flux = [&](double r) {
    const RadialProfile p = he11_profile(mode, r);
    const std::complex<double> h_r = (p.e_z / r - mode.beta * p.e_phi) / (omega * constants::mu0);
    const std::complex<double> h_phi = (1i * mode.beta * p.e_r - p.de_z_dr) / (1i * omega * constants::mu0);
    const double s_z = 0.5 * std::real(p.e_r * std::conj(h_phi) - p.e_phi * std::conj(h_r));
    return 2.0 * pi * r * s_z;
  };
  const double a = mode.radius, decay = 1.0 / mode.exterior_parameter;
  return integrate(flux, 0.0, a, 1e-13) + integrate(flux, a, a + 4.0 * decay, 1e-13) +
         integrate(flux, a + 4.0 * decay, a + 60.0 * decay, 1e-13);
}

LightField LightField::running(const GuidedMode& mode, double power, double polarization_angle,
                               Direction direction) {
  if (!(power >= 0.0)) throw Error(Errc::domain, "LightField: power must be non-negative");
  LightField f;
  f.mode = mode;
  f.power = power;
  f.polarization_angle = polarization_angle;
  f.direction = direction;
  return f;
}

LightField LightField::standing(const GuidedMode& mode, double forward_power, double backward_power,
                                double polarization_angle, double relative_phase) {
  if (!(forward_power >= 0.0 && backward_power >= 0.0))
    throw Error(Errc::domain, "LightField: standing-wave powers must be non-negative");
  LightField f;
  f.mode = mode;
  f.power = forward_power;
  f.counter_power = backward_power;
  f.polarization_angle = polarization_angle;
  f.configuration = Configuration::standing;
  f.relative_phase = relative_phase;
  return f;
}

Vec3 Cylindrical::cartesian() const { return {r * std::cos(phi), r * std::sin(phi), z}; }

Cylindrical Cylindrical::from_cartesian(const Vec3& p) {
  return {std::hypot(p.x(), p.y()), std::atan2(p.y(), p.x()), p.z()};
}

CVec3 quasi_linear_field(const GuidedMode& mode, double polarization_angle, Direction direction,
                         const Cylindrical& position) {
  if (!mode.solved()) throw Error(Errc::state, "field_at: guided mode has not been solved");
  if (!(position.r >= 0.0)) throw Error(Errc::domain, "field_at: negative radius");
  const RadialProfile p = he11_profile(mode, position.r);
  const double f = static_cast<double>(static_cast<int>(direction));
  const double rel = position.phi - polarization_angle;
  const double sq2 = std::sqrt(2.0);
  const std::complex<double> e_r = sq2 * p.e_r * std::cos(rel);
  const std::complex<double> e_phi = sq2 * 1i * p.e_phi * std::sin(rel);
  const std::complex<double> e_z = f * sq2 * p.e_z * std::cos(rel);
  const std::complex<double> phase = -1i * mode.normalization * std::exp(1i * f * mode.beta * position.z);
  const double c = std::cos(position.phi), s = std::sin(position.phi);
  return CVec3(e_r * c - e_phi * s, e_r * s + e_phi * c, e_z) * phase;
}

CVec3 field_at(const LightField& field, const Cylindrical& position) {
  if (field.configuration == Configuration::running)
    return std::sqrt(field.power) * quasi_linear_field(field.mode, field.polarization_angle, field.direction, position);
  const CVec3 fwd = quasi_linear_field(field.mode, field.polarization_angle, Direction::forward, position);
  const CVec3 bwd = quasi_linear_field(field.mode, field.polarization_angle, Direction::backward, position);
  return std::sqrt(field.power) * fwd + std::sqrt(field.counter_power) * std::exp(1i * field.relative_phase) * bwd;
}

double PolarGrid::r_at(int i) const {
  return r_points > 1 ? r_min + (r_max - r_min) * i / (r_points - 1) : r_min;
}

double PolarGrid::phi_at(int k) const { return 2.0 * pi * k / phi_points; }

namespace {
void check_grid(const PolarGrid& grid) {
  if (!(grid.r_min >= 0.0)) throw Error(Errc::domain, "intensity_map: grid starts at negative radius");
  if (grid.r_max < grid.r_min || grid.r_points < 1 || grid.phi_points < 1)
    throw Error(Errc::domain, "intensity_map: invalid grid");
}
}  // namespace

Eigen::MatrixXd intensity_map(const LightField& field, const PolarGrid& grid) {
  check_grid(grid);
  Eigen::MatrixXd map(grid.r_points, grid.phi_points);
  for (int i = 0; i < grid.r_points; ++i)
    for (int k = 0; k < grid.phi_points; ++k)
      map(i, k) = field_at(field, {grid.r_at(i), grid.phi_at(k), grid.z}).squaredNorm();
  return map;
}

std::vector<FieldSample> field_map(const LightField& field, const PolarGrid& grid) {
  check_grid(grid);
  std::vector<FieldSample> samples;
  samples.reserve(static_cast<std::size_t>(grid.r_points) * grid.phi_points);
  for (int i = 0; i < grid.r_points; ++i)
    for (int k = 0; k < grid.phi_points; ++k) {
      const Cylindrical pos{grid.r_at(i), grid.phi_at(k), grid.z};
      samples.push_back({pos, field_at(field, pos)});
    }
  return samples;
}

void write_field_csv(std::ostream& out, const std::vector<FieldSample>& samples) {
  out << "r_m,phi_rad,z_m,Ex_re,Ex_im,Ey_re,Ey_im,Ez_re,Ez_im\n";
  out << std::setprecision(17);
  for (const auto& s : samples) {
    out << s.position.r << ',' << s.position.phi << ',' << s.position.z;
    for (int c = 0; c < 3; ++c) out << ',' << s.field(c).real() << ',' << s.field(c).imag();
    out << '\n';
  }
}

}  // namespace nanotrap
