#include "nanotrap/atom_cs.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "nanotrap/angular_momentum.hpp"
#include "nanotrap/constants.hpp"
#include "nanotrap/error.hpp"
#include "nanotrap/numerics.hpp"

#ifndef NANOTRAP_DATA_DIR
#define NANOTRAP_DATA_DIR "data"
#endif

namespace nanotrap {

using constants::pi;

void HyperfineState::validate() const {
  const bool f_ok = manifold == Manifold::ground ? (F == 3 || F == 4) : (F >= 2 && F <= 5);
  if (!f_ok || std::abs(mF) > F)
    throw Error(Errc::domain, "invalid hyperfine state F=" + std::to_string(F) + " mF=" + std::to_string(mF));
}

double OpticalLine::angular_frequency() const { return 2.0 * pi * frequency; }
double OpticalLine::decay_rate() const { return 2.0 * pi * linewidth; }

double OpticalLine::dipole_squared() const {
  const double d = reduced_dipole_ea0 * constants::e * constants::bohr_radius;
  return 2.0 * d * d;  // (2J + 1) with J = 1/2
}

double OpticalLine::decay_rate_from_dipole() const {
  const double w = angular_frequency();
  return w * w * w * dipole_squared() /
         (3.0 * pi * constants::eps0 * constants::hbar * std::pow(constants::c, 3) * (2.0 * upper_j + 1.0));
}

double AtomicData::c3_si() const { return c3_surface * constants::h * 1e-18; }

// ---------------------------------------------------------------------------
// Data file
// ---------------------------------------------------------------------------

AtomicData parse_atomic_data(std::istream& in) {
  std::map<std::string, double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos)
      throw Error(Errc::config, "atomic data line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string text = trim(line.substr(eq + 1));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size())
      throw Error(Errc::config, "atomic data key '" + key + "': not a number: '" + text + "'");
    if (!values.emplace(key, v).second) throw Error(Errc::config, "atomic data key '" + key + "' repeated");
  }

  AtomicData d;
  const std::map<std::string, double*> slots = {
      {"nuclear_spin", &d.nuclear_spin},
      {"ground_hyperfine_splitting", &d.ground_hyperfine_splitting},
      {"g_j_ground", &d.g_j_ground},
      {"g_i", &d.g_i},
      {"bohr_magneton", &d.bohr_magneton},
      {"mass", &d.mass},
      {"g_j_d2_excited", &d.g_j_d2_excited},
      {"d1_frequency", &d.d1.frequency},
      {"d1_linewidth", &d.d1.linewidth},
      {"d1_reduced_dipole", &d.d1.reduced_dipole_ea0},
      {"d1_upper_j", &d.d1.upper_j},
      {"d2_frequency", &d.d2.frequency},
      {"d2_linewidth", &d.d2.linewidth},
      {"d2_reduced_dipole", &d.d2.reduced_dipole_ea0},
      {"d2_upper_j", &d.d2.upper_j},
      {"c3_surface", &d.c3_surface},
      {"sellmeier_b1", &d.silica.b[0]},
      {"sellmeier_b2", &d.silica.b[1]},
      {"sellmeier_b3", &d.silica.b[2]},
      {"sellmeier_c1", &d.silica.c_um[0]},
      {"sellmeier_c2", &d.silica.c_um[1]},
      {"sellmeier_c3", &d.silica.c_um[2]},
      {"sellmeier_min_wavelength", &d.silica.min_wavelength_um},
      {"sellmeier_max_wavelength", &d.silica.max_wavelength_um},
  };
  double version = 0.0;
  for (const auto& [key, v] : values) {
    if (key == "format_version") {
      version = v;
      continue;
    }
    const auto slot = slots.find(key);
    if (slot == slots.end()) throw Error(Errc::config, "atomic data: unknown key '" + key + "'");
    *slot->second = v;
  }
  if (version != 1.0) throw Error(Errc::config, "atomic data: unsupported or missing format_version");
  d.format_version = 1;
  for (const auto& [key, slot] : slots)
    if (!values.contains(key)) throw Error(Errc::config, "atomic data: missing key '" + key + "'");
  if (d.nuclear_spin != 3.5) throw Error(Errc::config, "atomic data: nuclear_spin must be 7/2 for cesium");
  return d;
}

AtomicData load_atomic_data(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config, "cannot read atomic data file '" + path.string() + "'");
  return parse_atomic_data(in);
}

std::filesystem::path default_atomic_data_path() {
  return std::filesystem::path(NANOTRAP_DATA_DIR) / "cesium.dat";
}

// ---------------------------------------------------------------------------
// Zeeman structure
// ---------------------------------------------------------------------------

namespace {

double lande(double g_j, double g_i, double J, double I, double F) {
  const double ff = F * (F + 1.0), jj = J * (J + 1.0), ii = I * (I + 1.0);
  return g_j * (ff - ii + jj) / (2.0 * ff) + g_i * (ff + ii - jj) / (2.0 * ff);
}

}  // namespace

double g_factor(const AtomicData& data, Manifold manifold, int F) {
  HyperfineState{manifold, F, 0}.validate();
  return manifold == Manifold::ground ? lande(data.g_j_ground, data.g_i, 0.5, data.nuclear_spin, F)
                                      : lande(data.g_j_d2_excited, data.g_i, 1.5, data.nuclear_spin, F);
}

double clock_coefficient(const AtomicData& data) {
  const double g = data.g_j_ground - data.g_i;
  return g * g * data.bohr_magneton * data.bohr_magneton / (2.0 * data.ground_hyperfine_splitting);
}

double breit_rabi_energy(const AtomicData& data, const HyperfineState& state, double field_gauss) {
  if (state.manifold != Manifold::ground)
    throw Error(Errc::domain, "breit_rabi_energy: excited-state input, use zeeman_shift_excited");
  state.validate();
  const double I = data.nuclear_spin, dE = data.ground_hyperfine_splitting;
  const double mu_b = data.bohr_magneton * field_gauss;
  const double m = state.mF;
  const bool upper = state.F == static_cast<int>(I + 0.5);
  if (upper && std::abs(m) == I + 0.5) {
    const double sign = m > 0 ? 1.0 : -1.0;
    return dE * I / (2.0 * I + 1.0) + sign * (0.5 * data.g_j_ground + I * data.g_i) * mu_b;
  }
  const double x = (data.g_j_ground - data.g_i) * mu_b / dE;
  const double root = std::sqrt(1.0 + 4.0 * m * x / (2.0 * I + 1.0) + x * x);
  return -dE / (2.0 * (2.0 * I + 1.0)) + data.g_i * m * mu_b + (upper ? 0.5 : -0.5) * dE * root;
}

double zeeman_shift_excited(const AtomicData& data, const HyperfineState& state, double field_gauss) {
  if (state.manifold != Manifold::excited)
    throw Error(Errc::domain, "zeeman_shift_excited: ground-state input, use breit_rabi_energy");
  state.validate();
  if (std::abs(field_gauss) > 50.0)
    throw Error(Errc::validity, "zeeman_shift_excited: linear Zeeman model limited to |B| <= 50 G");
  return g_factor(data, Manifold::excited, state.F) * state.mF * data.bohr_magneton * field_gauss;
}

double optical_transition_shift(const AtomicData& data, const HyperfineState& ground,
                                const HyperfineState& excited, double field_gauss) {
  const double ground_shift = breit_rabi_energy(data, ground, field_gauss) - breit_rabi_energy(data, ground, 0.0);
  return zeeman_shift_excited(data, excited, field_gauss) - ground_shift;
}

double mw_transition_frequency(const AtomicData& data, const HyperfineState& lower,
                               const HyperfineState& upper, double field_gauss) {
  if (lower.manifold != Manifold::ground || upper.manifold != Manifold::ground || lower.F != 3 || upper.F != 4)
    throw Error(Errc::domain, "mw_transition_frequency: expects |3, mF> -> |4, mF'>");
  if (std::abs(upper.mF - lower.mF) > 1)
    throw Error(Errc::selection_rule, "mw_transition_frequency: |delta mF| > 1");
  return breit_rabi_energy(data, upper, field_gauss) - breit_rabi_energy(data, lower, field_gauss);
}

double transition_strength(const AtomicData& data, const HyperfineState& ground, int q,
                           const HyperfineState& excited) {
  if (ground.manifold != Manifold::ground || excited.manifold != Manifold::excited)
    throw Error(Errc::domain, "transition_strength: expects a ground and an excited state");
  ground.validate();
  excited.validate();
  if (q < -1 || q > 1 || excited.mF != ground.mF + q)
    throw Error(Errc::selection_rule, "transition_strength: mF' must equal mF + q");
  if (std::abs(excited.F - ground.F) > 1) return 0.0;
  const int two_i = static_cast<int>(2.0 * data.nuclear_spin);
  auto line = [&](int F, int Fp) {
    const double six = wigner_6j(1, 3, 2, 2 * Fp, 2 * F, two_i);
    return (2.0 * Fp + 1.0) * 4.0 * six * six;
  };
  const double cg = clebsch_gordan(2 * ground.F, 2 * ground.mF, 2, 2 * q, 2 * excited.F, 2 * excited.mF);
  return line(ground.F, excited.F) * cg * cg / line(4, 5);
}

// ---------------------------------------------------------------------------
// Dynamic polarizabilities
// ---------------------------------------------------------------------------

namespace {

void check_detuning(const AtomicData& data, double wavelength) {
  if (!(wavelength > 0.0)) throw Error(Errc::domain, "polarizability: wavelength must be positive");
  const double nu = constants::c / wavelength;
  for (const OpticalLine* line : {&data.d1, &data.d2})
    if (std::abs(nu - line->frequency) < 10.0 * line->linewidth)
      throw Error(Errc::near_resonance, "polarizability: wavelength within 10 linewidths of a D line");
}

// Reduced rank-K polarizability of 6S1/2, summed over the D1 and D2 lines.
double reduced_polarizability(const AtomicData& data, double wavelength, int rank) {
  const double w = 2.0 * pi * constants::c / wavelength;
  const int two_j = 1;
  double sum = 0.0;
  for (const OpticalLine* line : {&data.d1, &data.d2}) {
    const int two_jp = static_cast<int>(std::lround(2.0 * line->upper_j));
    const double six = wigner_6j(2, 2 * rank, 2, two_j, two_jp, two_j);
    const double wl = line->angular_frequency();
    const double resonant = 1.0 / (wl - w) + (rank % 2 ? -1.0 : 1.0) / (wl + w);
    const double phase = ((rank + (two_j + two_jp) / 2 + 1) % 2) ? -1.0 : 1.0;
    sum += phase * six * line->dipole_squared() * resonant / constants::hbar;
  }
  return std::sqrt(2.0 * rank + 1.0) * sum;
}

}  // namespace

double scalar_polarizability(const AtomicData& data, double wavelength, Manifold manifold) {
  if (manifold != Manifold::ground)
    throw Error(Errc::domain, "scalar_polarizability: only the ground manifold is modelled");
  check_detuning(data, wavelength);
  return reduced_polarizability(data, wavelength, 0) / std::sqrt(3.0 * 2.0);
}

double vector_polarizability(const AtomicData& data, double wavelength, int F) {
  HyperfineState::ground(F, 0).validate();
  check_detuning(data, wavelength);
  const int two_i = static_cast<int>(2.0 * data.nuclear_spin);
  const double phase = ((1 + two_i + 2 * F) / 2) % 2 ? -1.0 : 1.0;
  const double six = wigner_6j(2 * F, 2, 2 * F, 1, two_i, 1);
  return phase * std::sqrt(2.0 * F * (2.0 * F + 1.0) / (F + 1.0)) * six *
         reduced_polarizability(data, wavelength, 1);
}

double tune_out(const AtomicData& data, double lo, double hi) {
  auto alpha = [&](double wavelength) {
    return scalar_polarizability(data, wavelength) / constants::atomic_unit_polarizability;
  };
  return find_root(alpha, lo, hi, 1e-15);
}

}  // namespace nanotrap
