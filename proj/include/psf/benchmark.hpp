#pragma once

#include <string>
#include <vector>

#include "psf/config.hpp"
#include "psf/filter.hpp"

namespace psf {

struct StepRecord {
  int k = 0;
  Eigen::VectorXd x;
  Eigen::VectorXd u_proposed;
  Eigen::VectorXd u_applied;
  bool intervened = false;
  double modification = 0.0;
  int horizon_used = 0;
  SolveStatus status = SolveStatus::Optimal;
  double solve_ms = 0.0;
};

struct EpisodeLog {
  int episode = 0;
  int switch_step = 0;
  std::vector<StepRecord> steps;
  double objective = 0.0;
  int violation_count = 0;     // against the untightened state set
  int intervention_count = 0;
};

struct BenchmarkResult {
  std::vector<EpisodeLog> episodes;
  double best_objective = 0.0;
  int episodes_to_success = -1;  // first episode with objective < threshold, -1 if none
  double success_threshold = 0.15;
};

// The learning loop: propose a switching time, run one episode through the
// filter (or raw in unfiltered mode), append the transitions to the dataset,
// update the model belief, repeat. Deterministic under the config seed.
BenchmarkResult run_benchmark(const RunConfig& config);

// Comma-separated trajectory dump, one row per step across all episodes.
void emit_plot_data(const std::vector<EpisodeLog>& logs, const std::string& path);

std::string logs_to_json(const std::vector<EpisodeLog>& logs);
std::vector<EpisodeLog> logs_from_json(const std::string& text);

std::string status_name(SolveStatus status);

}  // namespace psf
