#pragma once

#include <Eigen/Dense>
#include <vector>

namespace psf {

// One monomial c * prod_j z(var_j)^exp_j over the stacked vector z = (x, u).
struct MonomialTerm {
  double coeff = 1.0;
  std::vector<std::pair<int, int>> powers;  // (variable index, exponent >= 1)
};

// Polynomial feature map phi(x, u) given declaratively as a list of monomial
// terms per feature, so that exact Jacobians can be derived from the terms.
class FeatureMap {
 public:
  FeatureMap(int state_dim, int input_dim,
             std::vector<std::vector<MonomialTerm>> features);

  int state_dim() const { return state_dim_; }
  int input_dim() const { return input_dim_; }
  int count() const { return static_cast<int>(features_.size()); }

  Eigen::VectorXd eval(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

  // d phi / d (x, u), shape count() x (state_dim + input_dim).
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

  const std::vector<std::vector<MonomialTerm>>& terms() const { return features_; }

  // phi = (x_1, x_1^3, x_1^5, x_2, x_2^3, x_2^5, u, u^3, u^5) for the
  // 2-state 1-input pendulum.
  static FeatureMap pendulum_quintic();

  // phi = (x_1..x_n, u_1..u_m), so theta^T phi covers all linear systems.
  static FeatureMap linear(int state_dim, int input_dim);

 private:
  int state_dim_;
  int input_dim_;
  std::vector<std::vector<MonomialTerm>> features_;
};

}  // namespace psf
