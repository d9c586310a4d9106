#include "psf/benchmark.hpp"

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "psf/errors.hpp"

namespace psf {

std::string status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::MaxIter: return "max-iter";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

BenchmarkResult run_benchmark(const RunConfig& config) {
  DynamicsBelief belief = config.make_belief();
  const PlantFn plant = config.make_plant();
  const Polytope state_set = config.make_state_set();
  PolicySearch search(config.seed, config.episode_steps);

  BenchmarkResult result;
  result.best_objective = std::numeric_limits<double>::infinity();

  for (int episode = 0; episode < config.episodes; ++episode) {
    const int switch_step = search.propose();
    const BangBangPolicy policy{switch_step, config.pendulum.u_max};

    EpisodeLog log;
    log.episode = episode;
    log.switch_step = switch_step;

    std::vector<Transition> transitions;
    std::vector<Eigen::VectorXd> trajectory;
    Eigen::VectorXd x = config.x0;
    trajectory.push_back(x);

    std::optional<SafetyFilter> filter;
    if (config.mode != RunMode::Unfiltered) {
      // Throws ConfigError when the full-horizon problem is infeasible at x0.
      filter.emplace(config.make_ocp_template(belief), config.make_terminal_policy(), config.x0,
                     config.solver);
    }

    for (int k = 0; k < config.episode_steps; ++k) {
      Eigen::VectorXd u_proposed(1);
      u_proposed << policy(k);

      StepRecord record;
      record.k = k;
      record.x = x;
      record.u_proposed = u_proposed;

      Eigen::VectorXd x_next;
      if (filter) {
        auto [next, decision] = filter->safe_step(k, x, u_proposed, plant);
        x_next = next;
        record.u_applied = decision.applied;
        record.intervened = decision.intervened;
        record.modification = decision.modification;
        record.horizon_used = decision.horizon_used;
        record.status = decision.status;
        record.solve_ms = decision.solve_ms;
      } else {
        x_next = plant(x, u_proposed);
        record.u_applied = u_proposed;
      }

      if (!state_set.contains(x_next).inside) ++log.violation_count;
      if (record.intervened) ++log.intervention_count;
      transitions.push_back({x, record.u_applied, x_next});
      log.steps.push_back(std::move(record));
      x = x_next;
      trajectory.push_back(x);
    }

    log.objective = episode_objective(trajectory, config.episode_steps);
    search.record(switch_step, log.objective);
    result.best_objective = std::min(result.best_objective, log.objective);
    if (result.episodes_to_success < 0 && log.objective < result.success_threshold) {
      result.episodes_to_success = episode + 1;
    }
    result.episodes.push_back(std::move(log));

    if (config.mode != RunMode::Unfiltered) {
      belief.update(transitions);
    }
  }
  return result;
}

void emit_plot_data(const std::vector<EpisodeLog>& logs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("emit_plot_data: cannot open " + path);
  out << "episode,k";
  const int n = logs.empty() || logs[0].steps.empty() ? 2
               : static_cast<int>(logs[0].steps[0].x.size());
  for (int i = 0; i < n; ++i) out << ",x" << i;
  out << ",u_proposed,u_applied,intervened,modification,horizon,status,solve_ms\n";
  char buffer[64];
  auto fmt = [&](double v) {
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return std::string(buffer);
  };
  for (const auto& log : logs) {
    for (const auto& s : log.steps) {
      out << log.episode << "," << s.k;
      for (int i = 0; i < s.x.size(); ++i) out << "," << fmt(s.x(i));
      out << "," << fmt(s.u_proposed(0)) << "," << fmt(s.u_applied(0)) << ","
          << (s.intervened ? 1 : 0) << "," << fmt(s.modification) << "," << s.horizon_used << ","
          << status_name(s.status) << "," << fmt(s.solve_ms) << "\n";
    }
  }
}

namespace {

SolveStatus status_from_name(const std::string& name) {
  if (name == "optimal") return SolveStatus::Optimal;
  if (name == "feasible") return SolveStatus::Feasible;
  if (name == "infeasible") return SolveStatus::Infeasible;
  if (name == "max-iter") return SolveStatus::MaxIter;
  return SolveStatus::NumericalFailure;
}

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vec_from(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  for (int i = 0; i < v.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

}  // namespace

std::string logs_to_json(const std::vector<EpisodeLog>& logs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& log : logs) {
    nlohmann::json e;
    e["episode"] = log.episode;
    e["switch_step"] = log.switch_step;
    e["objective"] = log.objective;
    e["violation_count"] = log.violation_count;
    e["intervention_count"] = log.intervention_count;
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : log.steps) {
      nlohmann::json row;
      row["k"] = s.k;
      row["x"] = vec_json(s.x);
      row["u_proposed"] = vec_json(s.u_proposed);
      row["u_applied"] = vec_json(s.u_applied);
      row["intervened"] = s.intervened;
      row["modification"] = s.modification;
      row["horizon"] = s.horizon_used;
      row["status"] = status_name(s.status);
      row["solve_ms"] = s.solve_ms;
      steps.push_back(std::move(row));
    }
    e["steps"] = std::move(steps);
    out.push_back(std::move(e));
  }
  return out.dump(2);
}

std::vector<EpisodeLog> logs_from_json(const std::string& text) {
  const nlohmann::json in = nlohmann::json::parse(text);
  std::vector<EpisodeLog> logs;
  for (const auto& e : in) {
    EpisodeLog log;
    log.episode = e.at("episode").get<int>();
    log.switch_step = e.at("switch_step").get<int>();
    log.objective = e.at("objective").get<double>();
    log.violation_count = e.at("violation_count").get<int>();
    log.intervention_count = e.at("intervention_count").get<int>();
    for (const auto& r : e.at("steps")) {
      StepRecord s;
      s.k = r.at("k").get<int>();
      s.x = vec_from(r.at("x"));
      s.u_proposed = vec_from(r.at("u_proposed"));
      s.u_applied = vec_from(r.at("u_applied"));
      s.intervened = r.at("intervened").get<bool>();
      s.modification = r.at("modification").get<double>();
      s.horizon_used = r.at("horizon").get<int>();
      s.status = status_from_name(r.at("status").get<std::string>());
      s.solve_ms = r.at("solve_ms").get<double>();
      log.steps.push_back(std::move(s));
    }
    logs.push_back(std::move(log));
  }
  return logs;
}

}  // namespace psf
