#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace psf {

// Ground-truth dynamics callback: (x, u) -> x_next.
using PlantFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

struct PendulumParams {
  double h = 0.05;       // s
  double gravity = 9.81; // m/s^2
  double length = 0.5;   // m
  double mass = 0.15;    // kg
  double friction = 0.1; // N m s / rad
  double u_max = 0.6;
  // state x = (alpha [rad], alpha_dot [rad/s])
};

// Explicit-Euler pendulum step; the input is clipped to [-u_max, u_max] at
// the plant boundary.
Eigen::VectorXd pendulum_step(const PendulumParams& params, const Eigen::VectorXd& x, double u);

PlantFn make_pendulum(const PendulumParams& params);

// Total mechanical energy relative to the downward rest position.
double pendulum_energy(const PendulumParams& params, const Eigen::VectorXd& x);

struct BangBangPolicy {
  int switch_step = 0;  // k_s
  double magnitude = 0.6;

  double operator()(int k) const { return k <= switch_step ? -magnitude : magnitude; }
};

// ||alpha_T - pi||: deviation of the final angle from upright. Requires
// exactly `episode_steps` applied steps, i.e. trajectory length steps + 1.
double episode_objective(const std::vector<Eigen::VectorXd>& trajectory, int episode_steps = 70);

// Hill-climbing proposal for the switching time: Gaussian integer
// perturbation (std 5) around the best switch step so far; the first episode
// draws uniformly from [5, 40]. Proposals are clamped to [0, episode-1].
class PolicySearch {
 public:
  explicit PolicySearch(std::uint64_t seed, int episode_steps = 70);

  int propose();
  void record(int switch_step, double objective);

  int best_switch_step() const { return best_switch_; }
  double best_objective() const { return best_objective_; }

 private:
  std::uint64_t rng_state_;
  int episode_steps_;
  int best_switch_ = -1;
  double best_objective_ = std::numeric_limits<double>::infinity();

  std::uint64_t next_raw();
  double next_uniform();
  double next_normal();
};

}  // namespace psf
