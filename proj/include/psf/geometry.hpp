#pragma once

#include <Eigen/Dense>
#include <utility>

namespace psf {

// Result of a (tightened) membership test: satisfied flag plus the smallest
// row slack. Positive margin means strictly inside.
struct Membership {
  bool inside = false;
  double margin = 0.0;
};

// Polytope in normalized form { z | A z <= 1 }.
class Polytope {
 public:
  explicit Polytope(Eigen::MatrixXd a_normalized);

  // Normalizes A z <= b; every b entry must be positive.
  static Polytope from_inequalities(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

  // Axis-aligned box lo <= z <= hi (bounds must straddle the origin so the
  // normalized form exists).
  static Polytope box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

  const Eigen::MatrixXd& a() const { return a_; }
  int rows() const { return static_cast<int>(a_.rows()); }
  int dim() const { return static_cast<int>(a_.cols()); }
  double inf_norm() const { return inf_norm_; }

  // Largest row 2-norm; Lipschitz constant of z -> A z w.r.t. the 2-norm.
  double lipschitz() const { return lipschitz_; }

  // Membership in { z | A z <= (1 - eps) 1 }.
  Membership contains(const Eigen::VectorXd& z, double eps = 0.0) const;

 private:
  Eigen::MatrixXd a_;
  double inf_norm_;
  double lipschitz_;
};

// Terminal safe set { x | a_S(x) <= 1 } with affine (normalized) rows.
struct TerminalSet {
  Polytope set;
  double lipschitz() const { return set.lipschitz(); }
  Membership contains(const Eigen::VectorXd& x, double eps = 0.0) const {
    return set.contains(x, eps);
  }
};

// The tightening sequence eps_0 = 0, eps_{i+1} = eps_i + sqrt(rho)^i * eps,
// with closed form eps_i = eps (1 - sqrt(rho)^i) / (1 - sqrt(rho)).
class TighteningSchedule {
 public:
  TighteningSchedule(double rho, double eps, int horizon);

  double rho() const { return rho_; }
  double eps() const { return eps_; }
  int horizon() const { return horizon_; }

  double epsilon_at(int i) const;

 private:
  double rho_;
  double eps_;
  int horizon_;
};

// Admissible model error set: the 1-norm ball of radius r, written as
// { e | a_E(e) <= 1 } with a_E(e) = ||e||_1 / r.
class ErrorBall {
 public:
  explicit ErrorBall(double radius);

  double radius() const { return radius_; }

  // Lipschitz constant of a_E w.r.t. the 2-norm in dimension n.
  double lipschitz(int n) const;

  Membership contains(const Eigen::VectorXd& e, double eps = 0.0) const;

  // Lemma-style inflation: a_E(e) <= 1 + l_a * l_sigma * dz, i.e. the same
  // ball with radius scaled by (1 + l_a * l_sigma * dz).
  ErrorBall inflate(double dz_norm, double l_a, double l_sigma) const;

 private:
  double radius_;
};

// Estimated incremental-stabilizability constants.
struct StabilityCertificate {
  double rho = 0.0;
  double c_l = 0.0;
  double c_u = 0.0;
  double delta = 0.0;
  double pi_max = 0.0;
  int samples = 0;
};

// The five admissible-error bounds from the recursive-feasibility argument
// and their minimum e_hat.
struct ErrorBudget {
  double e1, e2, e3, e4, e5;
  double e_hat;
};

ErrorBudget error_budget(const StabilityCertificate& cert, double eps,
                         double terminal_lipschitz, double error_lipschitz,
                         double state_inf_norm, double input_inf_norm);

// Axis-aligned bounded box for Hausdorff computations.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

// Symmetric Hausdorff distance between two boxes under the 2-norm.
double hausdorff(const Box& a, const Box& b);

}  // namespace psf
