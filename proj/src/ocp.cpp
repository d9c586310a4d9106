#include "psf/ocp.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <vector>

#include "psf/errors.hpp"
#include "psf/qp.hpp"

namespace psf {

TranscribedOcp::TranscribedOcp(OcpSpec spec) : spec_(std::move(spec)) {
  if (spec_.belief == nullptr) throw ContractViolation("TranscribedOcp: missing dynamics belief");
  const int n = spec_.belief->state_dim();
  const int m = spec_.belief->input_dim();
  if (spec_.horizon < 1 || spec_.horizon > spec_.schedule.horizon()) {
    throw ContractViolation("TranscribedOcp: horizon out of range");
  }
  if (spec_.x0.size() != n || !spec_.x0.allFinite() || spec_.u_proposed.size() != m) {
    throw ContractViolation("TranscribedOcp: bad initial state or proposed input");
  }
  const int np = spec_.horizon;
  num_vars_ = m * np;
  int rows = (np - 1) * spec_.state_set.rows();  // states i = 1..N'-1
  rows += np * spec_.input_set.rows();           // inputs i = 0..N'-1
  if (spec_.mode == OcpMode::Robust) {
    rows += np;                                  // confidence margin per step
  } else if (spec_.confident_region) {
    rows += np * spec_.confident_region->rows();
  }
  rows += spec_.terminal.set.rows();
  num_constraints_ = rows;
}

TranscribedOcp::Evaluation TranscribedOcp::eval(const Eigen::VectorXd& v,
                                                bool with_jacobian) const {
  const DynamicsBelief& belief = *spec_.belief;
  const int n = belief.state_dim();
  const int m = belief.input_dim();
  const int np = spec_.horizon;
  const int nv = num_vars_;
  const bool nominal = spec_.mode == OcpMode::Nominal;

  Evaluation out;
  out.g.resize(num_constraints_);
  if (with_jacobian) out.jacobian = Eigen::MatrixXd::Zero(num_constraints_, nv);
  out.states.resize(n, np + 1);
  out.states.col(0) = spec_.x0;

  // Forward rollout with sensitivities S_i = d mu_i / d v. A diverging
  // rollout (possible at extreme trial points under polynomial features) is
  // saturated instead of propagated, so line searches can reject the point.
  constexpr double kStateCap = 1e12;
  std::vector<Eigen::MatrixXd> sens(np + 1, Eigen::MatrixXd::Zero(n, nv));
  for (int i = 0; i < np; ++i) {
    const Eigen::VectorXd x = out.states.col(i);
    const Eigen::VectorXd u = v.segment(i * m, m);
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kStateCap) {
      out.states.col(i + 1).setConstant(kStateCap);
      continue;
    }
    out.states.col(i + 1) = belief.predict_mean(x, u);
    if (!out.states.col(i + 1).allFinite()) out.states.col(i + 1).setConstant(kStateCap);
    if (with_jacobian) {
      const Eigen::MatrixXd jac = belief.mean().transpose() * belief.features().jacobian(x, u);
      sens[i + 1] = jac.leftCols(n) * sens[i];
      sens[i + 1].middleCols(i * m, m) += jac.rightCols(m);
      if (!sens[i + 1].allFinite()) sens[i + 1].setZero();
    }
  }

  auto eps_at = [&](int i) { return nominal ? 0.0 : spec_.schedule.epsilon_at(i); };

  int row = 0;
  // Tightened state rows, i = 1..N'-1.
  for (int i = 1; i < np; ++i) {
    const auto& a = spec_.state_set.a();
    out.g.segment(row, a.rows()) =
        a * out.states.col(i) - Eigen::VectorXd::Constant(a.rows(), 1.0 - eps_at(i));
    if (with_jacobian) out.jacobian.middleRows(row, a.rows()) = a * sens[i];
    row += static_cast<int>(a.rows());
  }
  // Tightened input rows, i = 0..N'-1.
  for (int i = 0; i < np; ++i) {
    const auto& a = spec_.input_set.a();
    out.g.segment(row, a.rows()) =
        a * v.segment(i * m, m) - Eigen::VectorXd::Constant(a.rows(), 1.0 - eps_at(i));
    if (with_jacobian) {
      out.jacobian.block(row, i * m, a.rows(), m) = a;
    }
    row += static_cast<int>(a.rows());
  }
  if (!nominal) {
    // Confidence margin: beta * sum_d sigma_d(mu_i, v_i) <= (1 - eps_i) r.
    const double r = spec_.error_ball.radius();
    for (int i = 0; i < np; ++i) {
      const Eigen::VectorXd x = out.states.col(i);
      const Eigen::VectorXd u = v.segment(i * m, m);
      if (!x.allFinite() || x.cwiseAbs().maxCoeff() >= kStateCap) {
        out.g(row) = kStateCap;  // saturated rollout: mark as badly violated
        ++row;
        continue;
      }
      const Eigen::VectorXd sigma = belief.predict_std(x, u);
      out.g(row) = spec_.beta * sigma.sum() - (1.0 - eps_at(i)) * r;
      if (with_jacobian) {
        const Eigen::VectorXd phi = belief.features().eval(x, u);
        const Eigen::MatrixXd phi_jac = belief.features().jacobian(x, u);
        Eigen::RowVectorXd dsum = Eigen::RowVectorXd::Zero(n + m);
        for (int dim = 0; dim < n; ++dim) {
          const double s = std::max(sigma(dim), 1e-12);
          dsum += (belief.covariance(dim) * phi).transpose() * phi_jac / s;
        }
        dsum *= spec_.beta;
        out.jacobian.row(row) = dsum.leftCols(n) * sens[i];
        out.jacobian.block(row, i * m, 1, m) += dsum.rightCols(m);
      }
      ++row;
    }
  } else if (spec_.confident_region) {
    // Z_c membership rows over the stacked pair (mu_i, v_i).
    const auto& a = spec_.confident_region->a();
    for (int i = 0; i < np; ++i) {
      Eigen::VectorXd z(n + m);
      z << out.states.col(i), v.segment(i * m, m);
      out.g.segment(row, a.rows()) = a * z - Eigen::VectorXd::Ones(a.rows());
      if (with_jacobian) {
        out.jacobian.middleRows(row, a.rows()) = a.leftCols(n) * sens[i];
        out.jacobian.block(row, i * m, a.rows(), m) += a.rightCols(m);
      }
      row += static_cast<int>(a.rows());
    }
  }
  // Terminal rows at i = N'.
  {
    const auto& a = spec_.terminal.set.a();
    out.g.segment(row, a.rows()) =
        a * out.states.col(np) - Eigen::VectorXd::Constant(a.rows(), 1.0 - eps_at(np));
    if (with_jacobian) out.jacobian.middleRows(row, a.rows()) = a * sens[np];
    row += static_cast<int>(a.rows());
  }
  return out;
}

double TranscribedOcp::objective(const Eigen::VectorXd& v) const {
  const int m = spec_.belief->input_dim();
  return (spec_.u_proposed - v.head(m)).squaredNorm();
}

Eigen::VectorXd TranscribedOcp::objective_gradient(const Eigen::VectorXd& v) const {
  const int m = spec_.belief->input_dim();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(num_vars_);
  grad.head(m) = 2.0 * (v.head(m) - spec_.u_proposed);
  return grad;
}

namespace {

double total_violation(const Eigen::VectorXd& g) {
  return g.cwiseMax(0.0).sum();
}

double max_violation(const Eigen::VectorXd& g) {
  return g.size() > 0 ? std::max(g.maxCoeff(), 0.0) : 0.0;
}

struct ElasticResult {
  bool feasible = false;
  Eigen::VectorXd v;
  double slack = 0.0;
  int iterations = 0;
};

// Restoration phase: minimize the total constraint violation
// min 1's  s.t.  g(v) <= s, s >= 0 via SQP steps on the slack formulation.
ElasticResult elastic_phase(const TranscribedOcp& ocp, Eigen::VectorXd v,
                            const SolverOptions& options) {
  const int nv = ocp.num_vars();
  const int nc = ocp.num_constraints();
  ElasticResult out;
  auto ev = ocp.eval(v);
  double viol = total_violation(ev.g);
  for (int iter = 0; iter < 60; ++iter) {
    ++out.iterations;
    if (viol <= 0.5 * options.feasibility_tolerance) {
      out.feasible = true;
      break;
    }
    // QP in (d, s): min 1's + small regularization, s.t. J d - s <= -g, -s <= 0.
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nv + nc, nv + nc);
    h.topLeftCorner(nv, nv) = 1e-2 * Eigen::MatrixXd::Identity(nv, nv);
    h.bottomRightCorner(nc, nc) = 1e-2 * Eigen::MatrixXd::Identity(nc, nc);
    Eigen::VectorXd lin = Eigen::VectorXd::Zero(nv + nc);
    lin.tail(nc).setOnes();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * nc, nv + nc);
    c.topLeftCorner(nc, nv) = ev.jacobian;
    c.topRightCorner(nc, nc) = -Eigen::MatrixXd::Identity(nc, nc);
    c.bottomRightCorner(nc, nc) = -Eigen::MatrixXd::Identity(nc, nc);
    Eigen::VectorXd rhs(2 * nc);
    rhs.head(nc) = -ev.g;
    rhs.tail(nc).setZero();
    const QpResult qp = solve_qp(h, lin, c, rhs);
    if (qp.status != QpStatus::Optimal) break;
    const Eigen::VectorXd d = qp.x.head(nv);
    const double predicted = qp.x.tail(nc).cwiseMax(0.0).sum();
    // Backtracking on the violation measure.
    double t = 1.0;
    bool improved = false;
    while (t > 1e-10) {
      auto trial = ocp.eval(v + t * d, false);
      const double trial_viol = total_violation(trial.g);
      if (trial_viol <= viol - 1e-4 * t * (viol - predicted)) {
        v += t * d;
        ev = ocp.eval(v);
        viol = trial_viol;
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved || d.norm() * t < 1e-12) break;
  }
  out.v = v;
  out.slack = viol;
  out.feasible = viol <= options.feasibility_tolerance;
  return out;
}

BackupPlan make_plan(const TranscribedOcp& ocp, const Eigen::VectorXd& v, SolveStatus status,
                     int iterations) {
  const auto& spec = ocp.spec();
  const int n = spec.belief->state_dim();
  const int m = spec.belief->input_dim();
  auto ev = ocp.eval(v, false);
  BackupPlan plan;
  plan.horizon = spec.horizon;
  plan.inputs = Eigen::Map<const Eigen::MatrixXd>(v.data(), m, spec.horizon);
  plan.states = ev.states;
  plan.objective = ocp.objective(v);
  plan.status = status;
  plan.max_violation = max_violation(ev.g);
  plan.total_slack = total_violation(ev.g);
  plan.iterations = iterations;
  (void)n;
  return plan;
}

}  // namespace

BackupPlan solve(const TranscribedOcp& ocp, const std::optional<Eigen::MatrixXd>& warm_start,
                 const SolverOptions& options) {
  const auto start_time = std::chrono::steady_clock::now();
  const auto& spec = ocp.spec();
  const int m = spec.belief->input_dim();
  const int nv = ocp.num_vars();

  Eigen::VectorXd v = Eigen::VectorXd::Zero(nv);
  if (warm_start) {
    if (warm_start->rows() != m || warm_start->cols() != spec.horizon) {
      throw ContractViolation("solve: warm start has wrong shape");
    }
    v = Eigen::Map<const Eigen::VectorXd>(warm_start->data(), nv);
  }

  // Gauss-Newton Hessian of ||u_L - v_0||^2 plus regularization.
  Eigen::MatrixXd h = 1e-8 * Eigen::MatrixXd::Identity(nv, nv);
  h.topLeftCorner(m, m) += 2.0 * Eigen::MatrixXd::Identity(m, m);

  double penalty = 1.0;
  int iterations = 0;
  bool restored_once = false;

  auto finalize = [&](SolveStatus status) {
    BackupPlan plan = make_plan(ocp, v, status, iterations);
    plan.wall_time_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start_time)
                            .count();
    return plan;
  };

  for (; iterations < options.max_iterations; ++iterations) {
    const auto ev = ocp.eval(v);
    const Eigen::VectorXd grad = ocp.objective_gradient(v);
    const QpResult qp = solve_qp(h, grad, ev.jacobian, -ev.g);

    if (qp.status == QpStatus::Infeasible || qp.status == QpStatus::NumericalFailure ||
        qp.status == QpStatus::MaxIter) {
      if (qp.status != QpStatus::Infeasible) {
        return finalize(SolveStatus::NumericalFailure);
      }
      // Linearization infeasible: decide via the elastic phase.
      ElasticResult elastic = elastic_phase(ocp, v, options);
      if (!elastic.feasible) {
        BackupPlan plan = finalize(SolveStatus::Infeasible);
        plan.total_slack = elastic.slack;
        return plan;
      }
      if (restored_once) {
        // Restoration loops back here: accept the feasible point as is.
        v = elastic.v;
        return finalize(SolveStatus::Feasible);
      }
      restored_once = true;
      v = elastic.v;
      continue;
    }

    const Eigen::VectorXd& d = qp.x;
    const Eigen::VectorXd& lambda = qp.lambda;

    const double stationarity = (grad + ev.jacobian.transpose() * lambda).lpNorm<Eigen::Infinity>();
    const double viol_inf = ev.g.size() > 0 ? ev.g.cwiseMax(0.0).lpNorm<Eigen::Infinity>() : 0.0;
    const double complementarity =
        ev.g.size() > 0 ? lambda.cwiseProduct(ev.g).cwiseAbs().maxCoeff() : 0.0;
    const double kkt = std::max({stationarity, viol_inf, complementarity});
    if (options.trace) {
      *options.trace << "iter " << iterations << " obj " << ocp.objective(v) << " kkt " << kkt
                     << " viol " << viol_inf << "\n";
    }
    if (kkt < options.kkt_tolerance) {
      return finalize(SolveStatus::Optimal);
    }

    penalty = std::max(penalty, 2.0 * lambda.lpNorm<Eigen::Infinity>() + 1.0);
    const double merit0 = ocp.objective(v) + penalty * total_violation(ev.g);
    const double directional =
        grad.dot(d) - penalty * total_violation(ev.g);  // <= 0 for a descent direction

    double t = 1.0;
    bool stepped = false;
    while (t > 1e-12) {
      const Eigen::VectorXd trial = v + t * d;
      const auto trial_ev = ocp.eval(trial, false);
      const double merit =
          ocp.objective(trial) + penalty * total_violation(trial_ev.g);
      if (merit <= merit0 + 1e-4 * t * directional) {
        v = trial;
        stepped = true;
        break;
      }
      t *= 0.5;
    }
    const double step_norm = stepped ? t * d.norm() : 0.0;
    if (!stepped || step_norm < options.step_tolerance) {
      // Stalled: classify by feasibility at the current point.
      const auto final_ev = ocp.eval(v, false);
      if (max_violation(final_ev.g) <= options.feasibility_tolerance) {
        const double final_kkt = kkt;
        return finalize(final_kkt < options.kkt_tolerance ? SolveStatus::Optimal
                                                          : SolveStatus::Feasible);
      }
      ElasticResult elastic = elastic_phase(ocp, v, options);
      if (!elastic.feasible) {
        BackupPlan plan = finalize(SolveStatus::Infeasible);
        plan.total_slack = elastic.slack;
        return plan;
      }
      v = elastic.v;
      return finalize(SolveStatus::Feasible);
    }
  }
  return finalize(SolveStatus::MaxIter);
}

Eigen::MatrixXd shift_warm_start(const BackupPlan& previous) {
  if (previous.horizon < 2) {
    throw ContractViolation("shift_warm_start: horizon must be >= 2");
  }
  return previous.inputs.rightCols(previous.horizon - 1);
}

}  // namespace psf
