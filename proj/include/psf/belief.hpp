#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "psf/feature_map.hpp"
#include "psf/geometry.hpp"

namespace psf {

// One observed transition (x, u) -> x_next.
struct Transition {
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  Eigen::VectorXd x_next;
};

// Box-shaped model confidence set centered at zero: per-dimension half-widths
// beta * sigma_f at probability level p.
struct ConfidenceBox {
  Eigen::VectorXd half_width;
  double p_level = 0.0;
  double beta = 1.0;
};

// Two-sided standard-normal quantile: the beta with P(|Z| <= beta) = p.
double gaussian_two_sided_quantile(double p);

// Bayesian linear-regression belief over next-state maps x+ = theta^T phi(x,u)
// with independent per-output regressions sharing one feature vector.
class DynamicsBelief {
 public:
  // Zero-mean prior with isotropic covariance prior_lambda * I per output and
  // fixed observation-noise variances.
  DynamicsBelief(FeatureMap features, double prior_lambda, const Eigen::VectorXd& noise_var);

  const FeatureMap& features() const { return features_; }
  int state_dim() const { return features_.state_dim(); }
  int input_dim() const { return features_.input_dim(); }

  // Posterior mean matrix theta_bar, p x n.
  const Eigen::MatrixXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance(int output) const { return cov_[output]; }
  const Eigen::VectorXd& noise_variance() const { return noise_var_; }
  int observation_count() const { return observations_; }

  Eigen::VectorXd predict_mean(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;
  Eigen::VectorXd predict_std(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

  // Conjugate posterior update from a batch of transitions.
  void update(const std::vector<Transition>& batch);

  // Drop all data and return to the prior.
  void reset();

  ConfidenceBox confidence_map(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                               double p_level) const;
  // Same box with an explicit scaling factor instead of the Gaussian quantile.
  ConfidenceBox confidence_box(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                               double beta, double p_level = 0.0) const;

  // Draw a parameter matrix from the posterior.
  Eigen::MatrixXd sample_parameters(std::uint64_t seed) const;

  // Overwrite the posterior directly (checkpoint loading, degenerate tests).
  void set_posterior(const Eigen::MatrixXd& mean, const std::vector<Eigen::MatrixXd>& cov);

  std::string to_checkpoint() const;
  static DynamicsBelief from_checkpoint(const std::string& text);

 private:
  void recompute_posterior();

  FeatureMap features_;
  double prior_lambda_;
  Eigen::VectorXd noise_var_;

  // Sufficient statistics: Phi^T Phi and Phi^T y per output.
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd xty_;  // p x n
  int observations_ = 0;

  Eigen::MatrixXd mean_;                 // p x n
  std::vector<Eigen::MatrixXd> cov_;     // n matrices, p x p
};

// Box-in-ball containment Sigma_pS(x,u) subset of the tightened error ball:
// true iff the summed half-widths fit inside radius (1 - eps_i) r.
Membership subset_check(const ConfidenceBox& box, const ErrorBall& budget, int i,
                        const TighteningSchedule& schedule);

}  // namespace psf
