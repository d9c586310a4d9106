#include "psf/stabilizability.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "psf/errors.hpp"

namespace psf {

Linearization linearize(const DynamicsBelief& belief, const Eigen::VectorXd& z,
                        const Eigen::VectorXd& v) {
  const int n = belief.state_dim();
  const int m = belief.input_dim();
  // d(theta^T phi)/dz from the feature term list.
  const Eigen::MatrixXd jac = belief.mean().transpose() * belief.features().jacobian(z, v);
  Linearization lin;
  lin.a = jac.leftCols(n);
  lin.b = jac.rightCols(m);
  return lin;
}

DareResult dare_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                      const Eigen::MatrixXd& qw, const Eigen::MatrixXd& rw) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || b.rows() != n || qw.rows() != n || qw.cols() != n ||
      rw.rows() != b.cols() || rw.cols() != b.cols()) {
    throw ContractViolation("dare_solve: dimension mismatch");
  }
  Eigen::MatrixXd p = qw;
  const int max_iter = 10000;
  int iter = 0;
  double residual = std::numeric_limits<double>::infinity();
  for (; iter < max_iter; ++iter) {
    const Eigen::MatrixXd btp = b.transpose() * p;
    const Eigen::MatrixXd s = rw + btp * b;
    const Eigen::MatrixXd k = -s.ldlt().solve(btp * a);
    Eigen::MatrixXd p_next = qw + a.transpose() * p * (a + b * k);
    p_next = 0.5 * (p_next + p_next.transpose()).eval();
    residual = (p_next - p).norm();
    p = p_next;
    if (residual < 1e-10) break;
  }
  if (residual >= 1e-10) {
    throw NumericalError("dare_solve: no convergence, pair likely not stabilizable");
  }
  DareResult out;
  const Eigen::MatrixXd btp = b.transpose() * p;
  out.k = -(rw + btp * b).ldlt().solve(btp * a);
  out.p = p;
  out.iterations = iter + 1;
  const Eigen::MatrixXd closed = a + b * out.k;
  out.residual = (p - closed.transpose() * p * closed - qw - out.k.transpose() * rw * out.k).norm();
  const double spectral_radius = closed.eigenvalues().cwiseAbs().maxCoeff();
  if (spectral_radius >= 1.0 - 1e-9) {
    throw NumericalError("dare_solve: closed loop not contractive (spectral radius " +
                         std::to_string(spectral_radius) + ")");
  }
  return out;
}

double contraction_condition_margin(const Eigen::MatrixXd& p_r, const Eigen::MatrixXd& p_next,
                                    const Eigen::MatrixXd& q_r) {
  // lambda_max(P_r^{-1} P_{r+}) via the generalized symmetric eigenproblem.
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> gev(p_next, p_r);
  const double lambda = gev.eigenvalues().maxCoeff();
  Eigen::MatrixXd m = lambda * q_r - (lambda - 1.0) * p_r;
  m = 0.5 * (m + m.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  return eig.eigenvalues().minCoeff();
}

StabilityCertificate estimate_certificate(
    const DynamicsBelief& belief,
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& references,
    const CertificateOptions& options) {
  if (references.empty()) {
    throw ContractViolation("estimate_certificate: empty reference sample set");
  }
  const int n = belief.state_dim();
  const int m = belief.input_dim();
  const Eigen::MatrixXd qw =
      options.qw.size() > 0 ? options.qw : Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd rw =
      options.rw.size() > 0 ? options.rw : Eigen::MatrixXd::Identity(m, m);

  struct LocalLqr {
    Eigen::MatrixXd p;
    Eigen::MatrixXd k;
  };
  std::vector<LocalLqr> lqr;
  lqr.reserve(references.size());
  double c_l = std::numeric_limits<double>::infinity();
  double c_u = 0.0;
  double pi_max = 0.0;
  for (const auto& [z, v] : references) {
    const Linearization lin = linearize(belief, z, v);
    const DareResult dare = dare_solve(lin.a, lin.b, qw, rw);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dare.p);
    c_l = std::min(c_l, eig.eigenvalues().minCoeff());
    c_u = std::max(c_u, eig.eigenvalues().maxCoeff());
    pi_max = std::max(pi_max, dare.k.operatorNorm());
    lqr.push_back({dare.p, dare.k});
  }

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.05, 1.0);

  // For each candidate delta (largest first) check contraction of the
  // nonlinear rollout on perturbed pairs; keep the first delta that works.
  std::vector<double> deltas = options.delta_grid;
  std::sort(deltas.rbegin(), deltas.rend());
  double worst_overall = std::numeric_limits<double>::infinity();
  std::size_t worst_ref = 0;
  for (const double delta : deltas) {
    double worst_ratio = 0.0;
    std::size_t worst_index = 0;
    for (std::size_t ri = 0; ri < references.size(); ++ri) {
      const auto& [z, v] = references[ri];
      const Eigen::MatrixXd& p = lqr[ri].p;
      const Eigen::MatrixXd& k = lqr[ri].k;
      const Eigen::VectorXd z_next = belief.predict_mean(z, v);
      Eigen::MatrixXd p_next;
      try {
        const Linearization lin_next = linearize(belief, z_next, v);
        p_next = dare_solve(lin_next.a, lin_next.b, qw, rw).p;
      } catch (const NumericalError&) {
        p_next = p;  // next reference left the stabilizable region; reuse
      }
      for (int s = 0; s < options.perturbations_per_reference; ++s) {
        Eigen::VectorXd dir(n);
        for (int i = 0; i < n; ++i) dir(i) = normal(rng);
        const double v_target = delta * unit(rng);
        const double scale = std::sqrt(v_target / dir.dot(p * dir));
        const Eigen::VectorXd x = z + scale * dir;
        const Eigen::VectorXd u = v + k * (x - z);
        const Eigen::VectorXd x_next = belief.predict_mean(x, u);
        const double v_before = (x - z).dot(p * (x - z));
        const double v_after = (x_next - z_next).dot(p_next * (x_next - z_next));
        const double ratio = v_after / v_before;
        if (ratio > worst_ratio) {
          worst_ratio = ratio;
          worst_index = ri;
        }
      }
    }
    if (worst_ratio < worst_overall) {
      worst_overall = worst_ratio;
      worst_ref = worst_index;
    }
    if (worst_ratio < options.rho_target) {
      StabilityCertificate cert;
      cert.rho = worst_ratio;
      cert.c_l = c_l;
      cert.c_u = c_u;
      cert.delta = delta;
      cert.pi_max = pi_max;
      cert.samples = static_cast<int>(references.size());
      return cert;
    }
  }
  std::ostringstream msg;
  msg << "estimate_certificate: no contraction rate < " << options.rho_target
      << " found; worst ratio " << worst_overall
      << " at reference index " << worst_ref;
  throw NumericalError(msg.str());
}

}  // namespace psf
