#pragma once

#include <Eigen/Dense>
#include <vector>

#include "psf/belief.hpp"
#include "psf/geometry.hpp"

namespace psf {

// Linearization of the mean dynamics at a reference r = (z, v).
struct Linearization {
  Eigen::MatrixXd a;  // n x n
  Eigen::MatrixXd b;  // n x m
};

Linearization linearize(const DynamicsBelief& belief, const Eigen::VectorXd& z,
                        const Eigen::VectorXd& v);

struct DareResult {
  Eigen::MatrixXd p;
  Eigen::MatrixXd k;
  int iterations = 0;
  double residual = 0.0;
};

// Discrete algebraic Riccati fixed point by iteration; throws NumericalError
// if the pair is not stabilizable (no convergence in 1e4 iterations).
DareResult dare_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                      const Eigen::MatrixXd& qw, const Eigen::MatrixXd& rw);

struct CertificateOptions {
  Eigen::MatrixXd qw;  // defaults to identity when empty
  Eigen::MatrixXd rw;
  int perturbations_per_reference = 12;
  std::uint64_t seed = 0;
  // Logarithmic grid of candidate validity radii delta.
  std::vector<double> delta_grid = {1e-3, 3.16e-3, 1e-2, 3.16e-2, 1e-1, 3.16e-1, 1.0};
  // Accept the largest delta whose worst contraction ratio stays below this.
  double rho_target = 1.0;
};

// Estimates (rho, c_l, c_u, delta, pi_max) by LQR synthesis at each sampled
// reference plus nonlinear contraction checks on perturbed pairs. Throws
// NumericalError naming the worst sample when no contraction rate < 1 exists.
StabilityCertificate estimate_certificate(
    const DynamicsBelief& belief,
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& references,
    const CertificateOptions& options = {});

// Left-hand side minus right-hand side of the contraction-rate matrix bound
// at a consecutive reference pair; the smallest eigenvalue is the certified c.
double contraction_condition_margin(const Eigen::MatrixXd& p_r, const Eigen::MatrixXd& p_next,
                                    const Eigen::MatrixXd& q_r);

}  // namespace psf
