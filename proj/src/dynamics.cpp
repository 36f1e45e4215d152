#include "nanotrap/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nanotrap/constants.hpp"
#include "nanotrap/error.hpp"
#include "nanotrap/light_matter.hpp"
#include "nanotrap/numerics.hpp"

namespace nanotrap {

using constants::pi;

PopulationVector PopulationVector::uniform() {
  return {Eigen::VectorXd::Constant(ground_levels, 1.0 / ground_levels), {}};
}

PopulationVector PopulationVector::stretched(int sign) {
  PopulationVector p{Eigen::VectorXd::Zero(ground_levels), {}};
  p.ground(ground_index(sign >= 0 ? 4 : -4)) = 1.0;
  return p;
}

PopulationVector PopulationVector::from_levels(const Eigen::VectorXd& levels) {
  if (levels.size() != pump_levels) throw Error(Errc::domain, "PopulationVector: expected 20 level populations");
  return {levels.head(ground_levels), levels.tail(excited_levels)};
}

Eigen::VectorXd PopulationVector::levels() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(pump_levels);
  out.head(ground_levels) = ground;
  if (excited.size() == excited_levels) out.tail(excited_levels) = excited;
  return out;
}

double PopulationVector::total() const { return ground.sum() + excited.sum(); }

Eigen::VectorXd PopulationVector::ground_distribution() const { return ground / ground.sum(); }

void PopulationVector::validate() const {
  if (ground.size() != ground_levels || (excited.size() != 0 && excited.size() != excited_levels))
    throw Error(Errc::domain, "PopulationVector: wrong number of sublevels");
  if (ground.minCoeff() < -1e-12 || (excited.size() && excited.minCoeff() < -1e-12))
    throw Error(Errc::domain, "PopulationVector: negative population");
  if (std::abs(total() - 1.0) > 1e-9) throw Error(Errc::domain, "PopulationVector: populations do not sum to 1");
}

PolarizationFractions PolarizationFractions::from_field(const CVec3& e, const Vec3& axis) {
  const CVec3 a = spherical_components(e, axis);
  const double norm = e.squaredNorm();
  if (!(norm > 0.0)) throw Error(Errc::undefined_point, "PolarizationFractions: zero field");
  return {std::norm(a(0)) / norm, std::norm(a(1)) / norm, std::norm(a(2)) / norm};
}

Eigen::MatrixXd pump_rates(const AtomicData& data, const PolarizationFractions& fractions, double saturation) {
  const double f[3] = {fractions.minus, fractions.pi, fractions.plus};
  for (double x : f)
    if (!(x >= 0.0)) throw Error(Errc::domain, "pump_rates: negative polarisation fraction");
  if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9)
    throw Error(Errc::domain, "pump_rates: polarisation fractions must sum to 1");
  if (!(saturation >= 0.0)) throw Error(Errc::domain, "pump_rates: negative saturation parameter");

  const double gamma = data.d2.decay_rate();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(pump_levels, pump_levels);
  for (int mg = -4; mg <= 4; ++mg) {
    for (int q = -1; q <= 1; ++q) {
      const int me = mg + q;
      const double strength =
          transition_strength(data, HyperfineState::ground(4, mg), q, HyperfineState::excited(5, me));
      const int g = ground_index(mg), e = excited_index(me);
      const double drive = 0.5 * gamma * saturation * f[q + 1] * strength;
      m(e, g) += drive;
      m(g, e) += drive + gamma * strength;
    }
  }
  for (int j = 0; j < pump_levels; ++j) m(j, j) = -(m.col(j).sum() - m(j, j));
  return m;
}

Eigen::MatrixXd effective_ground_generator(const Eigen::MatrixXd& rates) {
  if (rates.rows() != pump_levels || rates.cols() != pump_levels)
    throw Error(Errc::domain, "effective_ground_generator: expected a 20 x 20 generator");
  const auto gg = rates.topLeftCorner(ground_levels, ground_levels);
  const auto ge = rates.topRightCorner(ground_levels, excited_levels);
  const auto eg = rates.bottomLeftCorner(excited_levels, ground_levels);
  const Eigen::MatrixXd ee = rates.bottomRightCorner(excited_levels, excited_levels);
  return gg - ge * ee.partialPivLu().solve(Eigen::MatrixXd(eg));
}

PopulationVector pump_steady_state(const Eigen::MatrixXd& rates) {
  const Eigen::MatrixXd l = effective_ground_generator(rates);
  const double scale = l.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw Error(Errc::non_unique_steady_state, "pump_steady_state: no pumping, every state is stationary");

  Eigen::FullPivLU<Eigen::MatrixXd> kernel(l / scale);
  kernel.setThreshold(1e-10);
  if (kernel.dimensionOfKernel() != 1)
    throw Error(Errc::non_unique_steady_state, "pump_steady_state: disconnected rate graph, kernel dimension " +
                                                   std::to_string(kernel.dimensionOfKernel()));

  const double shift = 1e-9 * scale;
  const Eigen::PartialPivLU<Eigen::MatrixXd> resolvent(l - shift * Eigen::MatrixXd::Identity(ground_levels, ground_levels));
  Eigen::VectorXd x = Eigen::VectorXd::Constant(ground_levels, 1.0 / ground_levels);
  for (int iter = 0; iter < 1000; ++iter) {
    Eigen::VectorXd next = resolvent.solve(x);
    next /= next.sum();
    const double change = (next - x).cwiseAbs().sum();
    x = next;
    if (change < 1e-12) break;
  }
  x = x.cwiseMax(0.0);
  return {x / x.sum(), {}};
}

PopulationVector full_steady_state(const Eigen::MatrixXd& rates) {
  const Eigen::VectorXd g = pump_steady_state(rates).ground;
  const Eigen::MatrixXd ee = rates.bottomRightCorner(excited_levels, excited_levels);
  const Eigen::VectorXd e = -ee.partialPivLu().solve(rates.bottomLeftCorner(excited_levels, ground_levels) * g);
  const double total = g.sum() + e.sum();
  return {g / total, e.cwiseMax(0.0) / total};
}

PopulationVector pump_evolution(const Eigen::MatrixXd& rates, const PopulationVector& initial, double duration) {
  if (!(duration >= 0.0)) throw Error(Errc::domain, "pump_evolution: negative duration");
  if (rates.rows() != pump_levels || rates.cols() != pump_levels)
    throw Error(Errc::domain, "pump_evolution: expected a 20 x 20 generator");
  initial.validate();
  Eigen::VectorXd x = initial.levels();
  if (duration == 0.0) return PopulationVector::from_levels(x);

  auto rk4 = [&](const Eigen::VectorXd& y, double h) {
    const Eigen::VectorXd k1 = rates * y;
    const Eigen::VectorXd k2 = rates * (y + 0.5 * h * k1);
    const Eigen::VectorXd k3 = rates * (y + 0.5 * h * k2);
    const Eigen::VectorXd k4 = rates * (y + h * k3);
    return Eigen::VectorXd(y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  };

  constexpr double tol = 1e-9;
  const double rate_scale = rates.diagonal().cwiseAbs().maxCoeff();
  double h = rate_scale > 0.0 ? std::min(duration, 0.5 / rate_scale) : duration;
  const double min_step = 1e-14 * duration;
  double t = 0.0;
  while (t < duration) {
    h = std::min(h, duration - t);
    const Eigen::VectorXd full = rk4(x, h);
    const Eigen::VectorXd half = rk4(rk4(x, 0.5 * h), 0.5 * h);
    const double err = (half - full).cwiseAbs().maxCoeff() / 15.0;
    const double allowed = tol * std::max(1.0, half.cwiseAbs().maxCoeff());
    if (err <= allowed) {
      t += h;
      x = half + (half - full) / 15.0;
    }
    const double factor = err > 0.0 ? 0.9 * std::pow(allowed / err, 0.2) : 4.0;
    h *= std::clamp(factor, 0.1, 4.0);
    if (t < duration && h < min_step)
      throw Error(Errc::stiffness, "pump_evolution: step size underflow");
  }
  return PopulationVector::from_levels(x);
}

double pumping_time(const Eigen::MatrixXd& rates, const PopulationVector& initial) {
  const PopulationVector target = full_steady_state(rates);
  int k = 0;
  target.ground.maxCoeff(&k);
  const double deficit0 = target.ground(k) - initial.ground(k);
  if (!(deficit0 > 0.0)) return 0.0;
  auto ratio = [&](const PopulationVector& p) { return (target.ground(k) - p.ground(k)) / deficit0; };

  const double fastest = rates.diagonal().cwiseAbs().maxCoeff();
  double t_lo = 0.0, dt = 1.0 / fastest;
  PopulationVector at_lo = initial;
  for (int i = 0; i < 200; ++i, dt *= 2.0) {
    const PopulationVector at_hi = pump_evolution(rates, at_lo, dt);
    if (ratio(at_hi) <= std::exp(-1.0)) {
      auto f = [&](double t) { return ratio(pump_evolution(rates, at_lo, t)) - std::exp(-1.0); };
      return t_lo + find_root(f, 0.0, dt, 1e-9 * (t_lo + dt));
    }
    t_lo += dt;
    at_lo = at_hi;
  }
  throw Error(Errc::stiffness, "pumping_time: population never reached 1/e of its initial deficit");
}

double scattering_rate(const AtomicData& data, const HyperfineState& state, int q, double detuning,
                       double saturation) {
  if (state.manifold != Manifold::ground || state.F != 4)
    throw Error(Errc::selection_rule, "scattering_rate: expects a ground F = 4 state");
  if (q < -1 || q > 1 || std::abs(state.mF + q) > 5)
    throw Error(Errc::selection_rule, "scattering_rate: invalid transition");
  if (!(saturation >= 0.0)) throw Error(Errc::domain, "scattering_rate: negative saturation parameter");
  const double strength = transition_strength(data, state, q, HyperfineState::excited(5, state.mF + q));
  const double x = detuning / data.d2.linewidth;
  return 0.5 * data.d2.decay_rate() * saturation * strength / (1.0 + saturation + 4.0 * x * x);
}

PulseSpec PulseSpec::pi_pulse(double duration, double detuning) {
  if (!(duration > 0.0)) throw Error(Errc::domain, "PulseSpec: duration must be positive");
  PulseSpec p{pi / duration, duration, detuning};
  if (std::abs(p.rabi_frequency * p.duration - pi) > 1e-12 * pi)
    throw Error(Errc::domain, "PulseSpec: pulse area is not pi");
  return p;
}

double rabi_transfer(const PulseSpec& pulse) {
  if (!(pulse.rabi_frequency > 0.0) || !(pulse.duration > 0.0))
    throw Error(Errc::domain, "rabi_transfer: Rabi frequency and duration must be positive");
  const double omega2 = pulse.rabi_frequency * pulse.rabi_frequency;
  const double delta = 2.0 * pi * pulse.detuning;
  const double general2 = omega2 + delta * delta;
  const double s = std::sin(0.5 * std::sqrt(general2) * pulse.duration);
  return omega2 / general2 * s * s;
}

double pi_pulse_fwhm(double duration) {
  if (!(duration > 0.0)) throw Error(Errc::domain, "pi_pulse_fwhm: duration must be positive");
  auto half = [&](double detuning) { return rabi_transfer(PulseSpec::pi_pulse(duration, detuning)) - 0.5; };
  // The central lobe ends at sqrt(3)/(2 tau); 0.8/tau lies inside it.
  const double edge = 0.8 / duration, tol = 1e-13 / duration;
  return find_root(half, 0.0, edge, tol) - find_root(half, -edge, 0.0, tol);
}

}  // namespace nanotrap
