#include "psf/feature_map.hpp"

#include <cmath>

#include "psf/errors.hpp"

namespace psf {

FeatureMap::FeatureMap(int state_dim, int input_dim,
                       std::vector<std::vector<MonomialTerm>> features)
    : state_dim_(state_dim), input_dim_(input_dim), features_(std::move(features)) {
  if (state_dim_ <= 0 || input_dim_ < 0 || features_.empty()) {
    throw ContractViolation("FeatureMap: invalid dimensions");
  }
  const int nz = state_dim_ + input_dim_;
  for (const auto& feature : features_) {
    for (const auto& term : feature) {
      for (const auto& [var, exp] : term.powers) {
        if (var < 0 || var >= nz || exp < 1) {
          throw ContractViolation("FeatureMap: term references variable out of range");
        }
      }
    }
  }
}

Eigen::VectorXd FeatureMap::eval(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  if (x.size() != state_dim_ || u.size() != input_dim_) {
    throw ContractViolation("FeatureMap::eval: dimension mismatch");
  }
  Eigen::VectorXd z(state_dim_ + input_dim_);
  z << x, u;
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(count());
  for (int j = 0; j < count(); ++j) {
    for (const auto& term : features_[j]) {
      double value = term.coeff;
      for (const auto& [var, exp] : term.powers) {
        value *= std::pow(z(var), exp);
      }
      phi(j) += value;
    }
  }
  return phi;
}

Eigen::MatrixXd FeatureMap::jacobian(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  if (x.size() != state_dim_ || u.size() != input_dim_) {
    throw ContractViolation("FeatureMap::jacobian: dimension mismatch");
  }
  const int nz = state_dim_ + input_dim_;
  Eigen::VectorXd z(nz);
  z << x, u;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(count(), nz);
  for (int j = 0; j < count(); ++j) {
    for (const auto& term : features_[j]) {
      for (std::size_t d = 0; d < term.powers.size(); ++d) {
        const auto [dvar, dexp] = term.powers[d];
        double value = term.coeff * dexp * std::pow(z(dvar), dexp - 1);
        for (std::size_t o = 0; o < term.powers.size(); ++o) {
          if (o == d) continue;
          const auto [var, exp] = term.powers[o];
          value *= std::pow(z(var), exp);
        }
        jac(j, dvar) += value;
      }
    }
  }
  return jac;
}

FeatureMap FeatureMap::pendulum_quintic() {
  std::vector<std::vector<MonomialTerm>> features;
  for (int var : {0, 1, 2}) {
    for (int exp : {1, 3, 5}) {
      features.push_back({MonomialTerm{1.0, {{var, exp}}}});
    }
  }
  return FeatureMap(2, 1, std::move(features));
}

FeatureMap FeatureMap::linear(int state_dim, int input_dim) {
  std::vector<std::vector<MonomialTerm>> features;
  for (int var = 0; var < state_dim + input_dim; ++var) {
    features.push_back({MonomialTerm{1.0, {{var, 1}}}});
  }
  return FeatureMap(state_dim, input_dim, std::move(features));
}

}  // namespace psf
