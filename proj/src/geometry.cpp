#include "psf/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "psf/errors.hpp"

namespace psf {

Polytope::Polytope(Eigen::MatrixXd a_normalized) : a_(std::move(a_normalized)) {
  if (a_.rows() == 0 || a_.cols() == 0) {
    throw ContractViolation("Polytope: empty constraint matrix");
  }
  for (int i = 0; i < a_.rows(); ++i) {
    if (a_.row(i).norm() == 0.0) {
      throw ContractViolation("Polytope: zero row");
    }
  }
  inf_norm_ = a_.cwiseAbs().rowwise().sum().maxCoeff();
  lipschitz_ = a_.rowwise().norm().maxCoeff();
}

Polytope Polytope::from_inequalities(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  if (a.rows() != b.size()) {
    throw ContractViolation("Polytope: A and b row counts differ");
  }
  if ((b.array() <= 0.0).any()) {
    throw ContractViolation("Polytope: right-hand side must be positive to normalize");
  }
  return Polytope(b.cwiseInverse().asDiagonal() * a);
}

Polytope Polytope::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  const int n = static_cast<int>(lo.size());
  if (hi.size() != n) {
    throw ContractViolation("Polytope::box: bound dimensions differ");
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, n);
  Eigen::VectorXd b(2 * n);
  for (int i = 0; i < n; ++i) {
    a(2 * i, i) = 1.0;
    b(2 * i) = hi(i);
    a(2 * i + 1, i) = -1.0;
    b(2 * i + 1) = -lo(i);
  }
  return from_inequalities(a, b);
}

Membership Polytope::contains(const Eigen::VectorXd& z, double eps) const {
  if (z.size() != dim()) {
    throw ContractViolation("Polytope::contains: dimension mismatch");
  }
  if (eps >= 1.0) {
    throw ConfigError("Polytope::contains: tightening >= 1 empties the set");
  }
  const Eigen::VectorXd slack = Eigen::VectorXd::Constant(rows(), 1.0 - eps) - a_ * z;
  const double margin = slack.minCoeff();
  return {margin >= 0.0, margin};
}

TighteningSchedule::TighteningSchedule(double rho, double eps, int horizon)
    : rho_(rho), eps_(eps), horizon_(horizon) {
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("TighteningSchedule: rho must be in (0,1)");
  if (!(eps > 0.0)) throw ConfigError("TighteningSchedule: eps must be positive");
  if (horizon < 1) throw ConfigError("TighteningSchedule: horizon must be >= 1");
  if (epsilon_at(horizon) >= 1.0) {
    throw ConfigError("TighteningSchedule: eps_N >= 1, tightened sets empty");
  }
}

double TighteningSchedule::epsilon_at(int i) const {
  if (i < 0 || i > horizon_) {
    throw ContractViolation("TighteningSchedule::epsilon_at: index out of range");
  }
  const double sr = std::sqrt(rho_);
  return eps_ * (1.0 - std::pow(sr, i)) / (1.0 - sr);
}

ErrorBall::ErrorBall(double radius) : radius_(radius) {
  if (!(radius > 0.0)) throw ContractViolation("ErrorBall: radius must be positive");
}

double ErrorBall::lipschitz(int n) const {
  // |a_E(e) - a_E(e')| = | ||e||_1 - ||e'||_1 | / r <= sqrt(n) ||e - e'||_2 / r.
  return std::sqrt(static_cast<double>(n)) / radius_;
}

Membership ErrorBall::contains(const Eigen::VectorXd& e, double eps) const {
  if (eps >= 1.0) {
    throw ConfigError("ErrorBall::contains: tightening >= 1 empties the set");
  }
  const double margin = (1.0 - eps) * radius_ - e.lpNorm<1>();
  return {margin >= 0.0, margin};
}

ErrorBall ErrorBall::inflate(double dz_norm, double l_a, double l_sigma) const {
  if (dz_norm < 0.0) throw ContractViolation("ErrorBall::inflate: negative displacement");
  return ErrorBall(radius_ * (1.0 + l_a * l_sigma * dz_norm));
}

ErrorBudget error_budget(const StabilityCertificate& cert, double eps,
                         double terminal_lipschitz, double error_lipschitz,
                         double state_inf_norm, double input_inf_norm) {
  const bool valid = cert.c_l > 0.0 && cert.c_u > 0.0 && cert.delta > 0.0 &&
                     cert.pi_max > 0.0 && cert.rho > 0.0 && cert.rho < 1.0 &&
                     eps > 0.0 && terminal_lipschitz > 0.0 && error_lipschitz > 0.0 &&
                     state_inf_norm > 0.0 && input_inf_norm > 0.0;
  if (!valid) throw ContractViolation("error_budget: all constants must be positive, rho in (0,1)");
  const double gain = std::sqrt(cert.c_l / cert.c_u);
  ErrorBudget out{};
  out.e1 = std::sqrt(cert.delta / cert.c_u);
  out.e2 = gain * eps / state_inf_norm;
  out.e3 = gain * eps / terminal_lipschitz;
  out.e4 = gain * eps / (input_inf_norm * cert.pi_max);
  out.e5 = gain * eps / (error_lipschitz * (1.0 + cert.pi_max));
  out.e_hat = std::min({out.e1, out.e2, out.e3, out.e4, out.e5});
  return out;
}

namespace {

// Distance from a point to a box (2-norm).
double point_box_distance(const Eigen::VectorXd& p, const Box& b) {
  double sq = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    const double d = std::max({b.lo(i) - p(i), p(i) - b.hi(i), 0.0});
    sq += d * d;
  }
  return std::sqrt(sq);
}

// sup_{a in A} dist(a, B); the supremum is attained at a corner of A.
double directed_hausdorff(const Box& a, const Box& b) {
  const int n = static_cast<int>(a.lo.size());
  double worst = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    Eigen::VectorXd corner(n);
    for (int i = 0; i < n; ++i) {
      corner(i) = (mask & (1u << i)) ? a.hi(i) : a.lo(i);
    }
    worst = std::max(worst, point_box_distance(corner, b));
  }
  return worst;
}

}  // namespace

double hausdorff(const Box& a, const Box& b) {
  if (a.lo.size() == 0 || a.lo.size() != a.hi.size() || b.lo.size() != a.lo.size() ||
      b.hi.size() != a.lo.size()) {
    throw ContractViolation("hausdorff: boxes must share a positive dimension");
  }
  if ((a.hi - a.lo).minCoeff() < 0.0 || (b.hi - b.lo).minCoeff() < 0.0) {
    throw ContractViolation("hausdorff: empty box");
  }
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

}  // namespace psf
