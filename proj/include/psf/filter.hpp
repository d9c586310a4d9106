#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "psf/ocp.hpp"
#include "psf/plant.hpp"

namespace psf {

// Locally safe policy inside the terminal set. Receives (k, x, u_proposed);
// implementations are free to ignore arguments (the benchmark uses u = 0).
using TerminalPolicy =
    std::function<Eigen::VectorXd(int, const Eigen::VectorXd&, const Eigen::VectorXd&)>;

enum class FilterMode { Full, Shrinking, Terminal };

struct FilterDecision {
  Eigen::VectorXd applied;
  Eigen::VectorXd proposed;
  bool intervened = false;
  double modification = 0.0;  // ||u - u_L||_2
  int horizon_used = 0;       // 0 in terminal mode
  SolveStatus status = SolveStatus::NumericalFailure;
  FilterMode mode = FilterMode::Full;
  bool fallback_replay = false;  // shrinking solve failed numerically
  double solve_ms = 0.0;
};

// Safety filter: passes the proposed input through when a full-horizon backup
// plan certifies it, minimally modifies it otherwise, and falls back to
// horizon shrinking and finally the terminal policy.
class SafetyFilter {
 public:
  // Verifies full-horizon feasibility at (k = 0, x0); throws ConfigError when
  // the initial problem is infeasible.
  SafetyFilter(OcpSpec problem_template, TerminalPolicy terminal_policy,
               const Eigen::VectorXd& x0, SolverOptions solver_options = {});

  FilterDecision filter_input(int k, const Eigen::VectorXd& x, const Eigen::VectorXd& u_proposed);

  // Pure query: would u_proposed pass through unmodified?
  bool certify(int k, const Eigen::VectorXd& x, const Eigen::VectorXd& u_proposed) const;

  // Applies the filtered input to the plant and returns the successor state.
  std::pair<Eigen::VectorXd, FilterDecision> safe_step(int k, const Eigen::VectorXd& x,
                                                       const Eigen::VectorXd& u_proposed,
                                                       const PlantFn& plant);

  int last_feasible_time() const { return last_feasible_; }
  FilterMode mode() const { return mode_; }
  const std::optional<BackupPlan>& stored_plan() const { return stored_plan_; }

  // The belief pointer inside the problem template is shared with the caller;
  // call this after updating the model between episodes.
  void reset_clock() { last_feasible_ = 0; }

 private:
  BackupPlan solve_horizon(int horizon, const Eigen::VectorXd& x, const Eigen::VectorXd& u_proposed,
                           const std::optional<Eigen::MatrixXd>& warm) const;

  OcpSpec template_;
  TerminalPolicy terminal_policy_;
  SolverOptions options_;
  int last_feasible_ = 0;  // k_bar
  std::optional<BackupPlan> stored_plan_;
  FilterMode mode_ = FilterMode::Full;
};

}  // namespace psf
