#include "psf/plant.hpp"

#include <algorithm>
#include <cmath>

#include "psf/errors.hpp"

namespace psf {

Eigen::VectorXd pendulum_step(const PendulumParams& p, const Eigen::VectorXd& x, double u) {
  if (x.size() != 2 || !x.allFinite()) {
    throw ContractViolation("pendulum_step: state must be a finite 2-vector");
  }
  u = std::clamp(u, -p.u_max, p.u_max);
  const double ml2 = p.mass * p.length * p.length;
  Eigen::VectorXd next(2);
  next(0) = x(0) + p.h * x(1);
  next(1) = x(1) + p.h * (-(p.gravity / p.length) * std::sin(x(0)) -
                          (p.friction / ml2) * x(1) + u / ml2);
  return next;
}

PlantFn make_pendulum(const PendulumParams& params) {
  return [params](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return pendulum_step(params, x, u(0));
  };
}

double pendulum_energy(const PendulumParams& p, const Eigen::VectorXd& x) {
  const double kinetic = 0.5 * p.mass * p.length * p.length * x(1) * x(1);
  const double potential = p.mass * p.gravity * p.length * (1.0 - std::cos(x(0)));
  return kinetic + potential;
}

double episode_objective(const std::vector<Eigen::VectorXd>& trajectory, int episode_steps) {
  if (static_cast<int>(trajectory.size()) != episode_steps + 1) {
    throw ContractViolation("episode_objective: trajectory length must be episode steps + 1");
  }
  return std::abs(trajectory.back()(0) - M_PI);
}

PolicySearch::PolicySearch(std::uint64_t seed, int episode_steps)
    : rng_state_(seed ^ 0x9e3779b97f4a7c15ull), episode_steps_(episode_steps) {}

std::uint64_t PolicySearch::next_raw() {
  // splitmix64: deterministic across platforms.
  rng_state_ += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = rng_state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double PolicySearch::next_uniform() {
  return static_cast<double>(next_raw() >> 11) * 0x1.0p-53;
}

double PolicySearch::next_normal() {
  const double u1 = std::max(next_uniform(), 1e-300);
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

int PolicySearch::propose() {
  int k;
  if (best_switch_ < 0) {
    k = 5 + static_cast<int>(next_uniform() * 36.0);  // uniform on [5, 40]
  } else {
    k = best_switch_ + static_cast<int>(std::lround(5.0 * next_normal()));
  }
  return std::clamp(k, 0, episode_steps_ - 1);
}

void PolicySearch::record(int switch_step, double objective) {
  if (objective < best_objective_) {
    best_objective_ = objective;
    best_switch_ = switch_step;
  }
}

}  // namespace psf
