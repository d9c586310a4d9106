#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>

#include "psf/belief.hpp"
#include "psf/geometry.hpp"

namespace psf {

enum class OcpMode { Nominal, Robust };

// Finite-horizon backup-planning problem description.
struct OcpSpec {
  OcpSpec(Polytope state, Polytope input, TighteningSchedule sched, TerminalSet term,
          ErrorBall ball)
      : state_set(std::move(state)),
        input_set(std::move(input)),
        schedule(sched),
        terminal(std::move(term)),
        error_ball(ball) {}

  int horizon = 0;  // N', 1 <= N' <= schedule horizon
  const DynamicsBelief* belief = nullptr;
  Polytope state_set;
  Polytope input_set;
  TighteningSchedule schedule;
  TerminalSet terminal;
  ErrorBall error_ball;
  double beta = 1.0;  // confidence-box scaling used in the margin constraint
  // Confident region over (x, u) for nominal mode; empty means vacuous.
  std::optional<Polytope> confident_region;
  OcpMode mode = OcpMode::Robust;
  Eigen::VectorXd x0;
  Eigen::VectorXd u_proposed;
};

enum class SolveStatus { Optimal, Feasible, Infeasible, MaxIter, NumericalFailure };

struct BackupPlan {
  Eigen::MatrixXd inputs;  // m x N'
  Eigen::MatrixXd states;  // n x (N'+1), first column = x0
  int horizon = 0;
  double objective = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  double max_violation = 0.0;   // worst tightened-constraint violation
  double total_slack = 0.0;     // from the elastic phase when infeasible
  int iterations = 0;
  double wall_time_ms = 0.0;
};

// Single-shooting transcription: decision vector v in R^{m N'}, quadratic
// objective ||u_proposed - v_0||^2, smooth inequality constraints g(v) <= 0
// with analytic Jacobians via forward sensitivity propagation.
class TranscribedOcp {
 public:
  explicit TranscribedOcp(OcpSpec spec);

  int num_vars() const { return num_vars_; }
  int num_constraints() const { return num_constraints_; }
  const OcpSpec& spec() const { return spec_; }

  struct Evaluation {
    Eigen::VectorXd g;        // constraint values, feasible iff g <= 0
    Eigen::MatrixXd jacobian; // num_constraints x num_vars
    Eigen::MatrixXd states;   // n x (N'+1) rollout under the mean dynamics
  };

  Evaluation eval(const Eigen::VectorXd& v, bool with_jacobian = true) const;

  double objective(const Eigen::VectorXd& v) const;
  Eigen::VectorXd objective_gradient(const Eigen::VectorXd& v) const;

 private:
  OcpSpec spec_;
  int num_vars_;
  int num_constraints_;
};

struct SolverOptions {
  int max_iterations = 100;
  double kkt_tolerance = 1e-6;
  double step_tolerance = 1e-8;
  double feasibility_tolerance = 1e-6;
  std::ostream* trace = nullptr;  // per-iteration log (iter, merit, kkt)
};

BackupPlan solve(const TranscribedOcp& ocp,
                 const std::optional<Eigen::MatrixXd>& warm_start = std::nullopt,
                 const SolverOptions& options = {});

// Shifted initial guess for the next time step: drop v_0, keep v_1.. .
Eigen::MatrixXd shift_warm_start(const BackupPlan& previous);

}  // namespace psf
