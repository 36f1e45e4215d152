#include <cmath>
#include <numbers>
#include <unsupported/Eigen/MatrixFunctions>

#include "nanotrap/dynamics.hpp"
#include "nanotrap/light_matter.hpp"
#include "nanotrap/random.hpp"
#include "support.hpp"

using namespace nanotrap;
using std::numbers::pi;

namespace {

const AtomicData& cs() { return test::cesium(); }

// tests/oracles/goldens.py: scipy expm of an independently assembled
// 20-level rate matrix, probe at 852 nm 230 nm above the surface, s = 0.01,
// ground populations renormalised.
constexpr double oracle_stretched = 0.978764434912 / 0.9954496108265114;

PolarizationFractions probe_fractions() {
  const LightField f = LightField::running(solve_he11(test::fiber(), 852e-9), 1e-12, 0.0);
  return PolarizationFractions::from_field(field_at(f, {f.mode.radius + 230e-9, 0.0, 0.0}), Vec3::UnitY());
}

PopulationVector random_ground(std::uint64_t seed) {
  CounterRng rng(seed);
  Eigen::VectorXd levels = Eigen::VectorXd::Zero(pump_levels);
  for (int i = 0; i < ground_levels; ++i) levels(i) = rng.uniform();
  levels /= levels.sum();
  return PopulationVector::from_levels(levels);
}

Eigen::VectorXd expm_action(const Eigen::MatrixXd& rates, const Eigen::VectorXd& p, double t) {
  return (rates * t).exp() * p;
}

}  // namespace

TEST_CASE("rate matrix is a generator") {
  for (const PolarizationFractions f : {PolarizationFractions{1, 0, 0}, PolarizationFractions{0.2, 0.5, 0.3}, probe_fractions()}) {
    const Eigen::MatrixXd r = pump_rates(cs(), f, 0.01);
    CHECK(r.rows() == pump_levels);
    CHECK(r.colwise().sum().cwiseAbs().maxCoeff() < 1e-9 * r.cwiseAbs().maxCoeff());
    for (int i = 0; i < r.rows(); ++i)
      for (int j = 0; j < r.cols(); ++j)
        if (i != j) CHECK(r(i, j) >= 0.0);
  }
  CHECK(test::raises(Errc::domain, [] { pump_rates(cs(), {1.2, -0.2, 0.0}, 0.01); }));
  CHECK(test::raises(Errc::domain, [] { pump_rates(cs(), {1.0, 0.0, 0.0}, -1.0); }));
}

TEST_CASE("pure pi rates commute with the mF reflection") {
  const Eigen::MatrixXd r = pump_rates(cs(), {0.0, 1.0, 0.0}, 0.01);
  Eigen::MatrixXd reflect = Eigen::MatrixXd::Zero(pump_levels, pump_levels);
  for (int m = -4; m <= 4; ++m) reflect(ground_index(-m), ground_index(m)) = 1.0;
  for (int m = -5; m <= 5; ++m) reflect(excited_index(-m), excited_index(m)) = 1.0;
  CHECK((reflect * r - r * reflect).cwiseAbs().maxCoeff() < 1e-12 * r.cwiseAbs().maxCoeff());
}

TEST_CASE("steady states") {
  const PopulationVector sp = pump_steady_state(pump_rates(cs(), {1, 0, 0}, 0.01));
  CHECK(sp.at(4) == doctest::Approx(1.0).epsilon(1e-10));
  const PopulationVector pi_ss = pump_steady_state(pump_rates(cs(), {0, 1, 0}, 0.01));
  for (int m = 1; m <= 4; ++m) CHECK(pi_ss.at(m) == doctest::Approx(pi_ss.at(-m)).epsilon(1e-9));
  const PopulationVector probe = pump_steady_state(pump_rates(cs(), probe_fractions(), 0.01));
  CHECK(probe.at(4) == doctest::Approx(oracle_stretched).epsilon(1e-8));
  CHECK(probe.total() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("steady state independent of the starting distribution") {
  const Eigen::MatrixXd r = pump_rates(cs(), probe_fractions(), 0.01);
  const Eigen::VectorXd ss = pump_steady_state(r).ground_distribution();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Eigen::VectorXd p = expm_action(r, random_ground(seed).levels(), 0.05);
    const Eigen::VectorXd g = p.head(ground_levels) / p.head(ground_levels).sum();
    CHECK((g - ss).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("mirror covariance under sigma+ <-> sigma-") {
  for (const PolarizationFractions f : {probe_fractions(), PolarizationFractions{0.6, 0.3, 0.1}}) {
    const PopulationVector a = pump_steady_state(pump_rates(cs(), f, 0.01));
    const PopulationVector b = pump_steady_state(pump_rates(cs(), f.mirrored(), 0.01));
    for (int m = -4; m <= 4; ++m) CHECK(std::abs(a.at(m) - b.at(-m)) < 1e-12);
  }
  // lower site sees the mirrored polarisation
  const LightField f = LightField::running(solve_he11(test::fiber(), 852e-9), 1e-12, 0.0);
  const PolarizationFractions lower =
      PolarizationFractions::from_field(field_at(f, {f.mode.radius + 230e-9, pi, 0.0}), Vec3::UnitY());
  const PolarizationFractions upper = probe_fractions();
  CHECK(lower.plus == doctest::Approx(upper.minus).epsilon(1e-12));
  CHECK(lower.minus == doctest::Approx(upper.plus).epsilon(1e-12));
}

TEST_CASE("unique steady state is required") {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(pump_levels, pump_levels);
  CHECK(test::raises(Errc::non_unique_steady_state, [&] { pump_steady_state(r); }));
}

TEST_CASE("pump_evolution") {
  const Eigen::MatrixXd r = pump_rates(cs(), probe_fractions(), 0.01);
  const PopulationVector start = PopulationVector::uniform();
  const PopulationVector same = pump_evolution(r, start, 0.0);
  CHECK((same.levels() - start.levels()).norm() == 0.0);
  // against the matrix exponential
  const Eigen::VectorXd ref = expm_action(r, start.levels(), 2e-3);
  const PopulationVector out = pump_evolution(r, start, 2e-3);
  CHECK((out.levels() - ref).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(out.total() == doctest::Approx(1.0).epsilon(1e-9));
  // long time limit
  const PopulationVector late = pump_evolution(r, start, 0.05);
  CHECK((late.ground_distribution() - pump_steady_state(r).ground_distribution()).cwiseAbs().maxCoeff() < 1e-6);
  // absorbing stretched state under pure sigma+
  const Eigen::MatrixXd rp = pump_rates(cs(), {1, 0, 0}, 0.01);
  PopulationVector p = start;
  double last = p.at(4);
  for (int i = 0; i < 40; ++i) {
    p = pump_evolution(rp, p, 2e-5);
    CHECK(p.at(4) >= last - 1e-12);
    CHECK(p.total() == doctest::Approx(1.0).epsilon(1e-9));
    last = p.at(4);
  }
  CHECK(test::raises(Errc::domain, [&] { pump_evolution(r, start, -1.0); }));
}

TEST_CASE("pumping time") {
  const Eigen::MatrixXd r = pump_rates(cs(), probe_fractions(), 0.01);
  const double t = pumping_time(r, PopulationVector::uniform());
  CHECK(t > 0.0);
  // deficit of the stretched level against the full 20-level steady state
  const double target = full_steady_state(r).at(4);
  const double start = 1.0 / 9.0;
  const double at_t = pump_evolution(r, PopulationVector::uniform(), t).at(4);
  CHECK((target - at_t) / (target - start) == doctest::Approx(std::exp(-1.0)).epsilon(1e-5));
}

TEST_CASE("scattering rate") {
  const double gamma = cs().d2.decay_rate();
  const auto m4 = HyperfineState::ground(4, -4);
  const double s = 1e-4;
  const double res = scattering_rate(cs(), m4, -1, 0.0, s);
  CHECK(res == doctest::Approx(0.5 * gamma * s).epsilon(1e-3));
  CHECK(scattering_rate(cs(), m4, -1, cs().d2.linewidth / 2.0, s) == doctest::Approx(res / 2.0).epsilon(1e-3));
  // push-out selectivity at 28 G: same sigma- beam on |4,+4>, detuned by the differential shift
  const auto p4 = HyperfineState::ground(4, 4);
  const double detuning = optical_transition_shift(cs(), p4, HyperfineState::excited(5, 3), 28.0) -
                          optical_transition_shift(cs(), m4, HyperfineState::excited(5, -5), 28.0);
  const double ratio = res / scattering_rate(cs(), p4, -1, detuning, s);
  CHECK(ratio > 1e3);
  CHECK(test::raises(Errc::selection_rule, [&] { scattering_rate(cs(), m4, -2, 0.0, s); }));
}

TEST_CASE("rabi transfer and Fourier-limited width") {
  CHECK(rabi_transfer(PulseSpec::pi_pulse(103e-6)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rabi_transfer(PulseSpec::pi_pulse(103e-6, 1e9)) < 1e-8);
  for (double d : {1e3, 3.3e3, 12e3}) {
    CHECK(rabi_transfer(PulseSpec::pi_pulse(40e-6, d)) == rabi_transfer(PulseSpec::pi_pulse(40e-6, -d)));
    CHECK(rabi_transfer(PulseSpec::pi_pulse(40e-6, d)) < 1.0);
  }
  CHECK(pi_pulse_fwhm(103e-6) == doctest::Approx(7.76e3).epsilon(0.05 / 7.76));
  CHECK(pi_pulse_fwhm(40e-6) == doctest::Approx(19.98e3).epsilon(0.1 / 19.98));
  CHECK(test::rel(pi_pulse_fwhm(2 * 40e-6), pi_pulse_fwhm(40e-6) / 2) < 1e-9);
  // dense-scan oracle of the closed form
  const double tau = 103e-6;
  double lo = 0.0;
  for (double d = 0.0; d < 10e3; d += 0.01)
    if (rabi_transfer(PulseSpec::pi_pulse(tau, d)) < 0.5) {
      lo = d;
      break;
    }
  CHECK(2 * lo == doctest::Approx(pi_pulse_fwhm(tau)).epsilon(1e-5));
}
