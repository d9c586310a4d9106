#include "psf/belief.hpp"

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "psf/errors.hpp"

namespace psf {

double gaussian_two_sided_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ContractViolation("gaussian_two_sided_quantile: p must be in (0,1)");
  }
  // Invert erf via bisection; plenty fast and dependency-free.
  const double target = p;  // P(|Z| <= b) = erf(b / sqrt(2))
  double lo = 0.0, hi = 10.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (std::erf(mid / std::sqrt(2.0)) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

DynamicsBelief::DynamicsBelief(FeatureMap features, double prior_lambda,
                               const Eigen::VectorXd& noise_var)
    : features_(std::move(features)), prior_lambda_(prior_lambda), noise_var_(noise_var) {
  if (!(prior_lambda_ > 0.0) || !std::isfinite(prior_lambda_)) {
    throw ContractViolation("DynamicsBelief: improper prior, lambda must be positive");
  }
  if (noise_var_.size() != features_.state_dim() || (noise_var_.array() < 0.0).any()) {
    throw ContractViolation("DynamicsBelief: noise variance must be >= 0 per state dimension");
  }
  reset();
}

void DynamicsBelief::reset() {
  const int p = features_.count();
  const int n = features_.state_dim();
  gram_ = Eigen::MatrixXd::Zero(p, p);
  xty_ = Eigen::MatrixXd::Zero(p, n);
  observations_ = 0;
  mean_ = Eigen::MatrixXd::Zero(p, n);
  cov_.assign(n, (prior_lambda_ * Eigen::MatrixXd::Identity(p, p)).eval());
}

Eigen::VectorXd DynamicsBelief::predict_mean(const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& u) const {
  if (!x.allFinite() || !u.allFinite()) {
    throw ContractViolation("predict_mean: non-finite query");
  }
  return mean_.transpose() * features_.eval(x, u);
}

Eigen::VectorXd DynamicsBelief::predict_std(const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& u) const {
  const Eigen::VectorXd phi = features_.eval(x, u);
  const int n = features_.state_dim();
  Eigen::VectorXd sigma(n);
  for (int i = 0; i < n; ++i) {
    const double var = phi.dot(cov_[i] * phi);
    if (var < -1e-10) {
      throw NumericalError("predict_std: posterior covariance not PSD (phi' C phi = " +
                           std::to_string(var) + ")");
    }
    sigma(i) = std::sqrt(std::max(var, 0.0) + noise_var_(i));
  }
  return sigma;
}

void DynamicsBelief::update(const std::vector<Transition>& batch) {
  if (batch.empty()) {
    throw ContractViolation("update: empty batch");
  }
  for (const auto& t : batch) {
    if (t.x_next.size() != features_.state_dim()) {
      throw ContractViolation("update: transition dimension mismatch");
    }
    const Eigen::VectorXd phi = features_.eval(t.x, t.u);
    gram_.noalias() += phi * phi.transpose();
    xty_.noalias() += phi * t.x_next.transpose();
    ++observations_;
  }
  recompute_posterior();
}

void DynamicsBelief::recompute_posterior() {
  const int p = features_.count();
  const int n = features_.state_dim();
  for (int i = 0; i < n; ++i) {
    const double noise = noise_var_(i);
    if (noise <= 0.0) {
      throw NumericalError("update: zero noise variance makes the likelihood precision singular");
    }
    Eigen::MatrixXd precision =
        Eigen::MatrixXd::Identity(p, p) / prior_lambda_ + gram_ / noise;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(precision);
    if (ldlt.info() != Eigen::Success) {
      throw NumericalError("update: posterior precision factorization failed");
    }
    cov_[i] = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
    mean_.col(i) = ldlt.solve(xty_.col(i) / noise);
  }
}

ConfidenceBox DynamicsBelief::confidence_map(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                             double p_level) const {
  return confidence_box(x, u, gaussian_two_sided_quantile(p_level), p_level);
}

ConfidenceBox DynamicsBelief::confidence_box(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                             double beta, double p_level) const {
  if (beta < 0.0) {
    throw ContractViolation("confidence_box: beta must be >= 0");
  }
  ConfidenceBox box;
  box.half_width = beta * predict_std(x, u);
  box.p_level = p_level;
  box.beta = beta;
  return box;
}

Eigen::MatrixXd DynamicsBelief::sample_parameters(std::uint64_t seed) const {
  const int p = features_.count();
  const int n = features_.state_dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd draw(p, n);
  for (int i = 0; i < n; ++i) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov_[i] + 1e-14 * Eigen::MatrixXd::Identity(p, p));
    if (llt.info() != Eigen::Success) {
      throw NumericalError("sample_parameters: covariance factorization failed");
    }
    Eigen::VectorXd z(p);
    for (int j = 0; j < p; ++j) z(j) = normal(rng);
    draw.col(i) = mean_.col(i) + llt.matrixL() * z;
  }
  return draw;
}

void DynamicsBelief::set_posterior(const Eigen::MatrixXd& mean,
                                   const std::vector<Eigen::MatrixXd>& cov) {
  const int p = features_.count();
  const int n = features_.state_dim();
  if (mean.rows() != p || mean.cols() != n || static_cast<int>(cov.size()) != n) {
    throw ContractViolation("set_posterior: dimension mismatch");
  }
  for (const auto& c : cov) {
    if (c.rows() != p || c.cols() != p) {
      throw ContractViolation("set_posterior: covariance dimension mismatch");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
    if (eig.eigenvalues().minCoeff() < -1e-10) {
      throw NumericalError("set_posterior: covariance not PSD");
    }
  }
  mean_ = mean;
  cov_ = cov;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

}  // namespace

std::string DynamicsBelief::to_checkpoint() const {
  nlohmann::json j;
  j["version"] = 1;
  j["state_dim"] = features_.state_dim();
  j["input_dim"] = features_.input_dim();
  nlohmann::json feats = nlohmann::json::array();
  for (const auto& feature : features_.terms()) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& term : feature) {
      nlohmann::json t;
      t["coeff"] = term.coeff;
      t["powers"] = term.powers;
      terms.push_back(t);
    }
    feats.push_back(terms);
  }
  j["features"] = feats;
  j["prior_lambda"] = prior_lambda_;
  nlohmann::json noise = nlohmann::json::array();
  for (int i = 0; i < noise_var_.size(); ++i) noise.push_back(noise_var_(i));
  j["noise_var"] = noise;
  j["observations"] = observations_;
  j["gram"] = matrix_to_json(gram_);
  j["xty"] = matrix_to_json(xty_);
  return j.dump(2);
}

DynamicsBelief DynamicsBelief::from_checkpoint(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("version").get<int>() != 1) {
    throw ConfigError("checkpoint: unsupported version");
  }
  std::vector<std::vector<MonomialTerm>> features;
  for (const auto& feature : j.at("features")) {
    std::vector<MonomialTerm> terms;
    for (const auto& t : feature) {
      MonomialTerm term;
      term.coeff = t.at("coeff").get<double>();
      term.powers = t.at("powers").get<std::vector<std::pair<int, int>>>();
      terms.push_back(std::move(term));
    }
    features.push_back(std::move(terms));
  }
  FeatureMap map(j.at("state_dim").get<int>(), j.at("input_dim").get<int>(), std::move(features));
  const auto& noise_json = j.at("noise_var");
  Eigen::VectorXd noise(noise_json.size());
  for (int i = 0; i < noise.size(); ++i) noise(i) = noise_json[i].get<double>();
  DynamicsBelief belief(std::move(map), j.at("prior_lambda").get<double>(), noise);
  belief.gram_ = matrix_from_json(j.at("gram"));
  belief.xty_ = matrix_from_json(j.at("xty"));
  belief.observations_ = j.at("observations").get<int>();
  if (belief.observations_ > 0) belief.recompute_posterior();
  return belief;
}

Membership subset_check(const ConfidenceBox& box, const ErrorBall& budget, int i,
                        const TighteningSchedule& schedule) {
  if ((box.half_width.array() < 0.0).any()) {
    throw ContractViolation("subset_check: negative half-width");
  }
  const double eps_i = schedule.epsilon_at(i);  // validates 0 <= i <= N
  const double margin = (1.0 - eps_i) * budget.radius() - box.half_width.sum();
  return {margin >= 0.0, margin};
}

}  // namespace psf
