#pragma once

#include <functional>
#include <string>
#include <vector>

#include "psf/belief.hpp"
#include "psf/config.hpp"

namespace psf {

struct TuneOptions {
  int samples = 100;          // S closed-loop rollouts per candidate radius
  double initial_radius = 0.04;
  double shrink_factor = 0.8;
  double min_radius = 1e-4;
  std::uint64_t seed = 0;
  std::ostream* trace = nullptr;  // per-candidate progress log
};

struct TuneReport {
  bool accepted = false;
  double radius = 0.0;
  int candidates_tried = 0;
  double hoeffding_confidence = 0.0;  // 1 - 2 exp(-2 S t^2) at t = 0.05
  std::string worst_sample;           // filled on exhaustion
};

// Monte Carlo design procedure: sample (x0, theta) from (feasible states,
// posterior), run the closed-loop filter for one episode per sample, shrink
// the admissible error radius until no run violates the constraints.
TuneReport tune_error_radius(const RunConfig& config, const DynamicsBelief& belief,
                             const TuneOptions& options = {});

// Sampled Lipschitz estimate of the confidence map under the Hausdorff
// metric, times a safety factor of 1.5. `half_width_fn` maps a stacked
// (x, u) point to confidence-box half-widths.
double estimate_lipschitz(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& half_width_fn,
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& sample_pairs,
    double safety_factor = 1.5);

}  // namespace psf
