#include "psf/filter.hpp"

#include <cmath>
#include <iostream>

#include "psf/errors.hpp"

namespace psf {

namespace {
bool feasible(SolveStatus status) {
  return status == SolveStatus::Optimal || status == SolveStatus::Feasible;
}
}  // namespace

SafetyFilter::SafetyFilter(OcpSpec problem_template, TerminalPolicy terminal_policy,
                           const Eigen::VectorXd& x0, SolverOptions solver_options)
    : template_(std::move(problem_template)),
      terminal_policy_(std::move(terminal_policy)),
      options_(solver_options) {
  template_.horizon = template_.schedule.horizon();
  const Eigen::VectorXd u_zero = Eigen::VectorXd::Zero(template_.belief->input_dim());
  BackupPlan initial = solve_horizon(template_.schedule.horizon(), x0, u_zero, std::nullopt);
  if (!feasible(initial.status)) {
    throw ConfigError("SafetyFilter: full-horizon problem infeasible at the initial state");
  }
  stored_plan_ = initial;
  last_feasible_ = 0;
}

BackupPlan SafetyFilter::solve_horizon(int horizon, const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& u_proposed,
                                       const std::optional<Eigen::MatrixXd>& warm) const {
  OcpSpec spec = template_;
  spec.horizon = horizon;
  spec.x0 = x;
  spec.u_proposed = u_proposed;
  return solve(TranscribedOcp(std::move(spec)), warm, options_);
}

FilterDecision SafetyFilter::filter_input(int k, const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& u_proposed) {
  if (x.size() != template_.belief->state_dim() ||
      u_proposed.size() != template_.belief->input_dim()) {
    throw ContractViolation("filter_input: dimension mismatch");
  }
  const int full_horizon = template_.schedule.horizon();

  FilterDecision decision;
  decision.proposed = u_proposed;

  std::optional<Eigen::MatrixXd> warm;
  if (stored_plan_ && stored_plan_->horizon >= 2) {
    warm = shift_warm_start(*stored_plan_);
    Eigen::MatrixXd padded(warm->rows(), full_horizon);
    padded.setZero();
    padded.leftCols(warm->cols()) = *warm;
    warm = padded;
  }

  BackupPlan full = solve_horizon(full_horizon, x, u_proposed, warm);
  if (feasible(full.status)) {
    last_feasible_ = k;
    stored_plan_ = full;
    mode_ = FilterMode::Full;
    decision.applied = full.inputs.col(0);
    decision.horizon_used = full_horizon;
    decision.status = full.status;
    decision.mode = FilterMode::Full;
    decision.solve_ms = full.wall_time_ms;
  } else if (k < full_horizon + last_feasible_) {
    const int horizon = full_horizon - (k - last_feasible_);
    std::optional<Eigen::MatrixXd> shrink_warm;
    if (stored_plan_ && stored_plan_->horizon == horizon + 1) {
      shrink_warm = shift_warm_start(*stored_plan_);
    }
    BackupPlan shrunk = solve_horizon(horizon, x, u_proposed, shrink_warm);
    decision.solve_ms = full.wall_time_ms + shrunk.wall_time_ms;
    if (feasible(shrunk.status)) {
      stored_plan_ = shrunk;
      mode_ = FilterMode::Shrinking;
      decision.applied = shrunk.inputs.col(0);
      decision.horizon_used = horizon;
      decision.status = shrunk.status;
      decision.mode = FilterMode::Shrinking;
    } else {
      // The shrinking solve is feasible in theory whenever the realized error
      // stayed inside the confidence map; a numerical failure here is logged
      // and the stored plan is replayed open loop.
      std::cerr << "[psf] warning: shrinking-horizon solve failed at k=" << k
                << " (status " << static_cast<int>(shrunk.status)
                << "), replaying stored plan\n";
      mode_ = FilterMode::Shrinking;
      decision.mode = FilterMode::Shrinking;
      decision.status = shrunk.status;
      decision.fallback_replay = true;
      decision.horizon_used = horizon;
      if (stored_plan_ && stored_plan_->horizon >= 2) {
        stored_plan_->inputs = stored_plan_->inputs.rightCols(stored_plan_->horizon - 1).eval();
        stored_plan_->states = stored_plan_->states.rightCols(stored_plan_->horizon).eval();
        stored_plan_->horizon -= 1;
        decision.applied = stored_plan_->inputs.col(0);
      } else {
        decision.applied = terminal_policy_(k, x, u_proposed);
      }
    }
  } else {
    mode_ = FilterMode::Terminal;
    decision.mode = FilterMode::Terminal;
    decision.status = full.status;
    decision.horizon_used = 0;
    decision.applied = terminal_policy_(k, x, u_proposed);
    decision.solve_ms = full.wall_time_ms;
  }

  decision.modification = (decision.applied - u_proposed).norm();
  decision.intervened = decision.modification > 1e-6;
  return decision;
}

bool SafetyFilter::certify(int k, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u_proposed) const {
  SafetyFilter probe(*this);  // pure query: run on a copy
  const FilterDecision decision = probe.filter_input(k, x, u_proposed);
  return !decision.intervened;
}

std::pair<Eigen::VectorXd, FilterDecision> SafetyFilter::safe_step(int k, const Eigen::VectorXd& x,
                                                                   const Eigen::VectorXd& u_proposed,
                                                                   const PlantFn& plant) {
  FilterDecision decision = filter_input(k, x, u_proposed);
  Eigen::VectorXd x_next = plant(x, decision.applied);
  if (!x_next.allFinite()) {
    throw NumericalError("safe_step: plant returned a non-finite state");
  }
  return {std::move(x_next), std::move(decision)};
}

}  // namespace psf
