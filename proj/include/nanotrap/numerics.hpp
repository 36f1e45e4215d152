#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nanotrap/error.hpp"

namespace nanotrap {

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Bessel function of the first kind J_n(x), integer order n >= 0.
double bessel_j(int order, double x);

/// Modified Bessel function of the second kind K_n(x), x > 0.
double bessel_k(int order, double x);

/// dJ_n/dx via the recurrence J_n' = (J_{n-1} - J_{n+1}) / 2.
double bessel_j_prime(int order, double x);

/// dK_n/dx via the recurrence K_n' = -(K_{n-1} + K_{n+1}) / 2.
double bessel_k_prime(int order, double x);

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

/// Brent's method on a sign-changing bracket. Returns the end of the final
/// bracket with the smaller residual; the bracket width is <= tol on exit.
/// The iterates are invariant under f -> -f and under swapping lo/hi.
template <typename F>
double find_root(F&& f, double lo, double hi, double tol) {
  if (!(tol > 0.0)) throw Error(Errc::domain, "find_root: tolerance must be positive");
  if (lo > hi) std::swap(lo, hi);
  auto eval = [&](double x) {
    const double y = f(x);
    if (!std::isfinite(y))
      throw Error(Errc::evaluation, "find_root: non-finite function value at x=" + std::to_string(x));
    return y;
  };
  double a = lo, b = hi;
  double fa = eval(a), fb = eval(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0))
    throw Error(Errc::bracket, "find_root: no sign change on [" + std::to_string(lo) + ", " +
                                   std::to_string(hi) + "]");

  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 0; iter < 500; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(c - b) <= tol || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = eval(b);
  }
  return b;
}

/// Golden-section minimisation of a unimodal function on [lo, hi].
template <typename F>
double golden_section_minimize(F&& f, double lo, double hi, double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

namespace detail {

struct KronrodRule {
  static constexpr std::array<double, 8> nodes = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> kronrod_weights = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> gauss_weights = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

template <typename F>
std::pair<double, double> kronrod_rule(F& f, double a, double b) {
  using R = KronrodRule;
  const double center = 0.5 * (a + b), half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * R::kronrod_weights[7];
  double gauss = fc * R::gauss_weights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * R::nodes[i];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += R::kronrod_weights[i] * sum;
    if (i % 2 == 1) gauss += R::gauss_weights[i / 2] * sum;
  }
  return {kronrod * half, std::abs(kronrod - gauss) * half};
}

template <typename F>
double kronrod_adaptive(F& f, double a, double b, double estimate, double error, double abs_tol, int depth) {
  if (depth <= 0 || error <= abs_tol) return estimate;
  const double center = 0.5 * (a + b);
  const auto [left, left_err] = kronrod_rule(f, a, center);
  const auto [right, right_err] = kronrod_rule(f, center, b);
  return kronrod_adaptive(f, a, center, left, left_err, 0.5 * abs_tol, depth - 1) +
         kronrod_adaptive(f, center, b, right, right_err, 0.5 * abs_tol, depth - 1);
}

}  // namespace detail

/// Adaptive 7/15-point Gauss–Kronrod quadrature on a finite interval.
template <typename F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-12, double abs_tol = 0.0) {
  const auto [estimate, error] = detail::kronrod_rule(f, a, b);
  const double tol = std::max(abs_tol, rel_tol * std::abs(estimate));
  return detail::kronrod_adaptive(f, a, b, estimate, error, tol, 30);
}

// ---------------------------------------------------------------------------
// Nonlinear least squares
// ---------------------------------------------------------------------------

struct DataPoint {
  double x = 0.0;
  double y = 0.0;
  double weight = 1.0;  // 1 / sigma^2
};

struct FitResult {
  Eigen::VectorXd parameters;
  Eigen::MatrixXd covariance;
  double residual_norm = 0.0;  // sqrt of the weighted sum of squared residuals
  int iterations = 0;
  bool converged = false;
  int ndof = 0;
  std::vector<double> residual_history;  // residual_norm after each accepted step

  double chi2() const { return residual_norm * residual_norm; }
  Eigen::VectorXd sigmas() const { return covariance.diagonal().cwiseMax(0.0).cwiseSqrt(); }
  Eigen::MatrixXd correlation() const;
};

struct FitOptions {
  int max_iterations = 200;
  double initial_damping = 1e-3;
  double damping_factor = 10.0;
  double max_damping = 1e16;
  double relative_tolerance = 1e-10;  // on residual decrease and on parameter step
  double jacobian_relative_step = 1e-6;
  double jacobian_absolute_step = 1e-9;
  // Optional box constraints; empty means unbounded. Accepted parameters are
  // clamped into [lower, upper].
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

using ModelFunction = std::function<double(const Eigen::VectorXd& parameters, double x)>;

/// Damped Gauss–Newton (Levenberg–Marquardt) minimisation of
/// sum_i w_i (y_i - model(p, x_i))^2 with a central-difference Jacobian.
/// The covariance is the inverse damped normal matrix scaled by chi2 / ndof.
FitResult least_squares(const ModelFunction& model, const Eigen::VectorXd& initial,
                        std::span<const DataPoint> data, const FitOptions& options = {});

}  // namespace nanotrap
