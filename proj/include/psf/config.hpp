#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "psf/belief.hpp"
#include "psf/filter.hpp"
#include "psf/geometry.hpp"
#include "psf/plant.hpp"

namespace psf {

enum class RunMode { Nominal, Robust, Unfiltered };

// Parsed run configuration. Angular quantities may be given in the file as
// strings with a "deg" suffix and are stored in radians.
struct RunConfig {
  PendulumParams pendulum;

  double prior_lambda = 1e-4;
  Eigen::VectorXd noise_var;

  Eigen::VectorXd state_lower, state_upper;
  Eigen::VectorXd input_lower, input_upper;
  Eigen::VectorXd terminal_lower, terminal_upper;

  double rho = 0.99;
  double eps = 0.02;
  int horizon = 20;

  double p_level = 0.9;
  double beta = 1.0;
  double error_radius = 0.02;

  int episodes = 15;
  int episode_steps = 70;
  std::uint64_t seed = 1;
  RunMode mode = RunMode::Robust;
  std::string output_dir = "out";
  Eigen::VectorXd x0;

  // Not serialized; the CLI points `solver.trace` at a file under --trace.
  SolverOptions solver;

  static RunConfig defaults();
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::string& path);
  std::string to_json() const;

  FeatureMap make_features() const;
  DynamicsBelief make_belief() const;
  Polytope make_state_set() const;
  Polytope make_input_set() const;
  TerminalSet make_terminal_set() const;
  TighteningSchedule make_schedule() const;
  OcpSpec make_ocp_template(const DynamicsBelief& belief) const;
  PlantFn make_plant() const;
  TerminalPolicy make_terminal_policy() const;
};

}  // namespace psf
