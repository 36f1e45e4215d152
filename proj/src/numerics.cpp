#include "nanotrap/numerics.hpp"

#include <cmath>
#include <string>

namespace nanotrap {

// The std:: special functions (libstdc++ implements them with series,
// continued fractions and asymptotic forms at full double precision) back the
// two Bessel kinds; the tests check them against independent quadrature
// oracles on the ranges the mode solver uses.

double bessel_j(int order, double x) {
  if (order < 0) throw Error(Errc::domain, "bessel_j: negative order " + std::to_string(order));
  if (!std::isfinite(x)) throw Error(Errc::domain, "bessel_j: non-finite argument");
  const double value = std::cyl_bessel_j(static_cast<double>(order), std::abs(x));
  return (x < 0.0 && order % 2 == 1) ? -value : value;
}

double bessel_k(int order, double x) {
  if (order < 0) throw Error(Errc::domain, "bessel_k: negative order " + std::to_string(order));
  if (!(x > 0.0)) throw Error(Errc::domain, "bessel_k: argument must be positive, got " + std::to_string(x));
  return std::cyl_bessel_k(static_cast<double>(order), x);
}

double bessel_j_prime(int order, double x) {
  if (order == 0) return -bessel_j(1, x);
  return 0.5 * (bessel_j(order - 1, x) - bessel_j(order + 1, x));
}

double bessel_k_prime(int order, double x) {
  if (order == 0) return -bessel_k(1, x);
  return -0.5 * (bessel_k(order - 1, x) + bessel_k(order + 1, x));
}

Eigen::MatrixXd FitResult::correlation() const {
  const Eigen::VectorXd s = sigmas();
  Eigen::MatrixXd corr = covariance;
  for (Eigen::Index i = 0; i < corr.rows(); ++i)
    for (Eigen::Index j = 0; j < corr.cols(); ++j)
      corr(i, j) = (s(i) > 0.0 && s(j) > 0.0) ? covariance(i, j) / (s(i) * s(j)) : (i == j ? 1.0 : 0.0);
  return corr;
}

namespace {

struct Problem {
  const ModelFunction& model;
  std::span<const DataPoint> data;
  const FitOptions& options;

  Eigen::VectorXd clamp(Eigen::VectorXd p) const {
    if (options.lower.size() == p.size()) p = p.cwiseMax(options.lower);
    if (options.upper.size() == p.size()) p = p.cwiseMin(options.upper);
    return p;
  }

  // Weighted residuals sqrt(w_i) (y_i - f(p, x_i)).
  Eigen::VectorXd residuals(const Eigen::VectorXd& p) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i)
      r(static_cast<Eigen::Index>(i)) = std::sqrt(data[i].weight) * (data[i].y - model(p, data[i].x));
    return r;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& p) const {
    const auto n = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd jac(n, p.size());
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      const double step =
          std::max(options.jacobian_relative_step * std::abs(p(j)), options.jacobian_absolute_step);
      Eigen::VectorXd up = p, down = p;
      up(j) += step;
      down(j) -= step;
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& pt = data[static_cast<std::size_t>(i)];
        const double d = (model(up, pt.x) - model(down, pt.x)) / (2.0 * step);
        if (!std::isfinite(d)) throw Error(Errc::evaluation, "least_squares: non-finite Jacobian entry");
        jac(i, j) = std::sqrt(pt.weight) * d;
      }
    }
    return jac;
  }
};

}  // namespace

FitResult least_squares(const ModelFunction& model, const Eigen::VectorXd& initial,
                        std::span<const DataPoint> data, const FitOptions& options) {
  const auto n_par = initial.size();
  const auto n_data = static_cast<Eigen::Index>(data.size());
  if (n_par == 0) throw Error(Errc::domain, "least_squares: no parameters");
  if (n_data < n_par)
    throw Error(Errc::domain, "least_squares: need at least one data point per parameter");
  for (const auto& pt : data)
    if (!(pt.weight > 0.0) || !std::isfinite(pt.x) || !std::isfinite(pt.y))
      throw Error(Errc::domain, "least_squares: weights must be positive and data finite");

  const Problem problem{model, data, options};
  FitResult result;
  Eigen::VectorXd p = problem.clamp(initial);
  Eigen::VectorXd r = problem.residuals(p);
  if (!r.allFinite()) throw Error(Errc::evaluation, "least_squares: non-finite model output at initial point");
  double norm = r.norm();
  result.residual_history.push_back(norm);

  double damping = options.initial_damping;
  Eigen::MatrixXd jac = problem.jacobian(p);
  bool converged = false;
  int iter = 0;

  for (; iter < options.max_iterations && !converged; ++iter) {
    if (norm == 0.0) {
      converged = true;
      break;
    }
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const Eigen::VectorXd gradient = jac.transpose() * r;
    Eigen::VectorXd scale(n_par);
    for (Eigen::Index j = 0; j < n_par; ++j)
      scale(j) = normal(j, j) > 0.0 ? 1.0 / std::sqrt(normal(j, j)) : 1.0;
    const Eigen::MatrixXd scaled = scale.asDiagonal() * normal * scale.asDiagonal();
    const Eigen::VectorXd scaled_gradient = scale.asDiagonal() * gradient;

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = scaled;
      damped.diagonal().array() += damping;
      const Eigen::VectorXd step = scale.asDiagonal() * damped.ldlt().solve(scaled_gradient);
      const Eigen::VectorXd trial = problem.clamp(p + step);
      const double step_norm = (trial - p).norm();
      if (step_norm <= options.relative_tolerance * (p.norm() + options.relative_tolerance)) {
        converged = true;
        break;
      }
      const Eigen::VectorXd trial_r = problem.residuals(trial);
      const double trial_norm = trial_r.allFinite() ? trial_r.norm() : std::numeric_limits<double>::infinity();
      if (trial_norm < norm) {
        const double decrease = (norm - trial_norm) / norm;
        p = trial;
        r = trial_r;
        norm = trial_norm;
        result.residual_history.push_back(norm);
        damping = std::max(damping / options.damping_factor, 1e-20);
        jac = problem.jacobian(p);
        accepted = true;
        if (decrease < options.relative_tolerance) converged = true;
      } else {
        damping *= options.damping_factor;
        if (damping > options.max_damping) {
          converged = true;  // no descent direction left at double precision
          break;
        }
      }
    }
  }

  // Covariance from the damped normal matrix at the solution.
  const Eigen::MatrixXd normal = jac.transpose() * jac;
  Eigen::VectorXd scale(n_par);
  for (Eigen::Index j = 0; j < n_par; ++j) {
    if (!(normal(j, j) > 0.0))
      throw Error(Errc::degenerate_fit, "least_squares: parameter " + std::to_string(j) +
                                            " does not influence the model");
    scale(j) = 1.0 / std::sqrt(normal(j, j));
  }
  const Eigen::MatrixXd scaled = scale.asDiagonal() * normal * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled);
  if (eig.eigenvalues().minCoeff() <= 1e-13 * eig.eigenvalues().maxCoeff())
    throw Error(Errc::degenerate_fit, "least_squares: singular normal matrix");
  Eigen::MatrixXd damped = scaled;
  damped.diagonal().array() += damping;
  const Eigen::MatrixXd inv = damped.inverse();
  result.ndof = static_cast<int>(n_data - n_par);
  const double variance = result.ndof > 0 ? norm * norm / result.ndof : 1.0;
  Eigen::MatrixXd cov = scale.asDiagonal() * inv * scale.asDiagonal() * variance;
  result.covariance = 0.5 * (cov + cov.transpose());
  result.parameters = p;
  result.residual_norm = norm;
  result.iterations = iter;
  result.converged = converged;
  return result;
}

}  // namespace nanotrap
