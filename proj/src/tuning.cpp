#include "psf/tuning.hpp"

#include <cmath>
#include <sstream>

#include "psf/errors.hpp"
#include "psf/geometry.hpp"
#include "psf/ocp.hpp"

namespace psf {

namespace {

struct SplitMix {
  std::uint64_t state;
  explicit SplitMix(std::uint64_t seed) : state(seed ^ 0x9e3779b97f4a7c15ull) {}
  std::uint64_t raw() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(raw() >> 11) * 0x1.0p-53; }
};

}  // namespace

TuneReport tune_error_radius(const RunConfig& config, const DynamicsBelief& belief,
                             const TuneOptions& options) {
  TuneReport report;
  // Vacuous (negative) for small S; clamp at zero.
  report.hoeffding_confidence =
      std::max(0.0, 1.0 - 2.0 * std::exp(-2.0 * options.samples * 0.05 * 0.05));

  const Polytope state_set = config.make_state_set();
  const Polytope input_set = config.make_input_set();

  // Pre-draw the sample set S = (x0, theta): initial states by rejection
  // sampling on full-horizon feasibility, parameters from the posterior.
  SplitMix rng(options.seed);
  std::vector<Eigen::VectorXd> initial_states;
  std::vector<Eigen::MatrixXd> thetas;
  std::vector<int> switch_steps;
  {
    RunConfig probe_config = config;
    probe_config.error_radius = options.initial_radius;
    OcpSpec spec = probe_config.make_ocp_template(belief);
    int attempts = 0;
    while (static_cast<int>(initial_states.size()) < options.samples) {
      if (++attempts > 200 * options.samples) {
        throw NumericalError(
            "tune_error_radius: feasible-set rejection sampling failed; the "
            "problem appears infeasible for every sampled initial state");
      }
      Eigen::VectorXd x0(config.state_lower.size());
      for (int i = 0; i < x0.size(); ++i) {
        x0(i) = config.state_lower(i) +
                rng.uniform() * (config.state_upper(i) - config.state_lower(i));
      }
      OcpSpec candidate = spec;
      candidate.x0 = x0;
      candidate.horizon = config.horizon;
      const BackupPlan plan = solve(TranscribedOcp(std::move(candidate)));
      if (plan.status == SolveStatus::Optimal || plan.status == SolveStatus::Feasible) {
        initial_states.push_back(x0);
        thetas.push_back(belief.sample_parameters(rng.raw()));
        switch_steps.push_back(static_cast<int>(rng.uniform() * config.episode_steps));
      }
    }
  }

  double radius = options.initial_radius;
  while (radius >= options.min_radius) {
    ++report.candidates_tried;
    bool violated = false;
    int completed = 0;
    for (int s = 0; s < options.samples && !violated; ++s) {
      RunConfig run_config = config;
      run_config.error_radius = radius;
      const Eigen::MatrixXd& theta = thetas[s];
      const FeatureMap features = config.make_features();
      PlantFn simulated_truth = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        return Eigen::VectorXd(theta.transpose() * features.eval(x, u));
      };
      const BangBangPolicy policy{switch_steps[s], config.pendulum.u_max};
      Eigen::VectorXd x = initial_states[s];
      try {
        SafetyFilter filter(run_config.make_ocp_template(belief),
                            run_config.make_terminal_policy(), x);
        for (int k = 0; k < config.episode_steps; ++k) {
          Eigen::VectorXd u_proposed(1);
          u_proposed << policy(k);
          auto [x_next, decision] = filter.safe_step(k, x, u_proposed, simulated_truth);
          // Membership up to the solver feasibility tolerance: inputs sit
          // exactly on their bound and carry rounding at the last bit.
          constexpr double kTol = 1e-6;
          if (!x_next.allFinite() || state_set.contains(x_next).margin < -kTol ||
              input_set.contains(decision.applied).margin < -kTol) {
            violated = true;
            std::ostringstream msg;
            msg << "sample " << s << " step " << k << " left the constraint set";
            report.worst_sample = msg.str();
            break;
          }
          x = x_next;
        }
        ++completed;
      } catch (const NumericalError&) {
        // Diverged simulated-truth rollout: the candidate radius failed.
        violated = true;
        std::ostringstream msg;
        msg << "sample " << s << " diverged for radius " << radius;
        report.worst_sample = msg.str();
      } catch (const ContractViolation&) {
        violated = true;
        std::ostringstream msg;
        msg << "sample " << s << " diverged for radius " << radius;
        report.worst_sample = msg.str();
      } catch (const ConfigError&) {
        // x0 fell out of the feasible set at this radius: it is no longer a
        // draw from X_N, so the sample is skipped rather than counted.
        continue;
      }
    }
    if (!violated && completed == 0) {
      // Every sample fell out of the feasible set at this radius; accepting
      // it would certify nothing.
      violated = true;
      report.worst_sample = "no sample remained in the feasible set";
    }
    if (options.trace) {
      *options.trace << "candidate r=" << radius
                     << (violated ? " rejected: " + report.worst_sample : " accepted") << "\n";
    }
    if (!violated) {
      report.accepted = true;
      report.radius = radius;
      return report;
    }
    radius *= options.shrink_factor;
  }
  report.accepted = false;
  report.radius = radius;
  return report;
}

double estimate_lipschitz(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& half_width_fn,
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& sample_pairs,
    double safety_factor) {
  double worst = 0.0;
  for (const auto& [z1, z2] : sample_pairs) {
    const double separation = (z1 - z2).norm();
    if (separation < 1e-4) {
      throw ContractViolation("estimate_lipschitz: sample pair separation below 1e-4");
    }
    const Eigen::VectorXd h1 = half_width_fn(z1);
    const Eigen::VectorXd h2 = half_width_fn(z2);
    const double dist = hausdorff(Box{-h1, h1}, Box{-h2, h2});
    worst = std::max(worst, dist / separation);
  }
  return safety_factor * worst;
}

}  // namespace psf
