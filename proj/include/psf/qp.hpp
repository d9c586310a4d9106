#pragma once

#include <Eigen/Dense>

namespace psf {

enum class QpStatus { Optimal, Infeasible, MaxIter, NumericalFailure };

struct QpResult {
  QpStatus status = QpStatus::NumericalFailure;
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;  // multipliers of C x <= d, nonnegative
  int iterations = 0;
};

// min 0.5 x'Hx + g'x  s.t.  C x <= d, with H positive definite.
// Dual active-set method (Goldfarb-Idnani); handles infeasible starts and
// detects inconsistent constraint systems.
QpResult solve_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                  const Eigen::MatrixXd& c, const Eigen::VectorXd& d);

}  // namespace psf
