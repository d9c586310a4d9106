#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "psf/benchmark.hpp"
#include "psf/config.hpp"
#include "psf/errors.hpp"
#include "psf/service.hpp"
#include "psf/stabilizability.hpp"
#include "psf/tuning.hpp"

namespace {

// Exit codes: 0 success, 2 config error, 3 infeasible startup, 4 runtime.
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitRuntime = 4;

psf::RunConfig load_config(const std::string& path, std::uint64_t seed, bool seed_set,
                           const std::string& mode) {
  psf::RunConfig config =
      path.empty() ? psf::RunConfig::defaults() : psf::RunConfig::load(path);
  if (seed_set) config.seed = seed;
  if (!mode.empty()) {
    if (mode == "nominal") config.mode = psf::RunMode::Nominal;
    else if (mode == "robust") config.mode = psf::RunMode::Robust;
    else if (mode == "unfiltered") config.mode = psf::RunMode::Unfiltered;
    else throw psf::ConfigError("unknown mode '" + mode + "'");
  }
  return config;
}

int cmd_run(const psf::RunConfig& config) {
  const psf::BenchmarkResult result = psf::run_benchmark(config);
  std::filesystem::create_directories(config.output_dir);
  {
    std::ofstream out(config.output_dir + "/episodes.json");
    out << psf::logs_to_json(result.episodes);
  }
  psf::emit_plot_data(result.episodes, config.output_dir + "/trajectory.csv");
  int violations = 0;
  int interventions = 0;
  for (const auto& e : result.episodes) {
    violations += e.violation_count;
    interventions += e.intervention_count;
    std::cout << "episode " << e.episode << ": switch_step=" << e.switch_step
              << " objective=" << e.objective << " violations=" << e.violation_count
              << " interventions=" << e.intervention_count << "\n";
  }
  std::cout << "best objective: " << result.best_objective << "\n";
  std::cout << "episodes to success: " << result.episodes_to_success << "\n";
  std::cout << "total violations: " << violations << ", total interventions: " << interventions
            << "\n";
  std::cout << "logs written to " << config.output_dir << "\n";
  return 0;
}

// Fits the belief on seeded closed-loop data and estimates the
// incremental-stabilizability constants on a state/input grid.
int cmd_verify_stab(const psf::RunConfig& config) {
  psf::DynamicsBelief belief = config.make_belief();
  const psf::PlantFn plant = config.make_plant();

  std::vector<psf::Transition> data;
  psf::PolicySearch noise(config.seed, config.episode_steps);
  Eigen::VectorXd x = config.x0;
  for (int k = 0; k < 600; ++k) {
    Eigen::VectorXd u(1);
    u << config.pendulum.u_max * std::sin(0.11 * k) * (0.3 + 0.7 * ((k / 40) % 2));
    Eigen::VectorXd x_next = plant(x, u);
    if (!config.make_state_set().contains(x_next).inside) {
      x = config.x0;  // restart inside the constraint set
      continue;
    }
    data.push_back({x, u, x_next});
    x = x_next;
  }
  belief.update(data);

  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> refs;
  for (double alpha = -0.9; alpha <= 3.1; alpha += 0.5) {
    for (double vel = -2.0; vel <= 2.0; vel += 1.0) {
      for (double torque = -0.5; torque <= 0.5; torque += 0.5) {
        Eigen::VectorXd z(2);
        z << alpha, vel;
        Eigen::VectorXd v(1);
        v << torque;
        refs.emplace_back(z, v);
      }
    }
  }
  psf::CertificateOptions opts;
  opts.seed = config.seed;
  opts.rho_target = config.rho;  // aim for the configured contraction rate
  // Down-weight velocity so the Lyapunov metric varies less along fast
  // references; diag(1, 0.5) certifies well below the schedule decay rate.
  opts.qw = Eigen::MatrixXd::Identity(2, 2);
  opts.qw(1, 1) = 0.5;
  const psf::StabilityCertificate cert = psf::estimate_certificate(belief, refs, opts);
  std::cout << "stabilizability certificate (" << cert.samples << " reference points)\n"
            << "  rho    = " << cert.rho << "\n"
            << "  c_l    = " << cert.c_l << "\n"
            << "  c_u    = " << cert.c_u << "\n"
            << "  delta  = " << cert.delta << "\n"
            << "  pi_max = " << cert.pi_max << "\n";
  const psf::ErrorBudget budget = psf::error_budget(
      cert, config.eps, config.make_terminal_set().lipschitz(),
      psf::ErrorBall(config.error_radius).lipschitz(2), config.make_state_set().inf_norm(),
      config.make_input_set().inf_norm());
  std::cout << "error budget: e_hat = " << budget.e_hat << " (components " << budget.e1 << ", "
            << budget.e2 << ", " << budget.e3 << ", " << budget.e4 << ", " << budget.e5 << ")\n";
  // Machine-readable block for the tuner and downstream checks.
  std::cout << "CERTIFICATE {\"rho\":" << cert.rho << ",\"c_l\":" << cert.c_l
            << ",\"c_u\":" << cert.c_u << ",\"delta\":" << cert.delta
            << ",\"pi_max\":" << cert.pi_max << ",\"e_hat\":" << budget.e_hat << "}\n";
  return 0;
}

int cmd_tune(const psf::RunConfig& config) {
  psf::DynamicsBelief belief = config.make_belief();
  // Warm up the model on one seeded episode of plant data so the posterior
  // used as simulated truth is informative.
  const psf::PlantFn plant = config.make_plant();
  std::vector<psf::Transition> data;
  Eigen::VectorXd x = config.x0;
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXd u(1);
    u << config.pendulum.u_max * std::sin(0.13 * k);
    Eigen::VectorXd x_next = plant(x, u);
    if (!config.make_state_set().contains(x_next).inside) {
      x = config.x0;
      continue;
    }
    data.push_back({x, u, x_next});
    x = x_next;
  }
  belief.update(data);

  psf::TuneOptions options;
  options.seed = config.seed;
  options.trace = &std::cerr;
  const psf::TuneReport report = psf::tune_error_radius(config, belief, options);
  std::cout << "tune report: candidates=" << report.candidates_tried
            << " hoeffding_confidence=" << report.hoeffding_confidence << "\n";
  if (report.accepted) {
    std::cout << "accepted radius r* = " << report.radius << "\n";
    std::cout << "TUNED {\"radius\":" << report.radius << "}\n";
    return 0;
  }
  std::cout << "tuning failed below r_min; worst sample: " << report.worst_sample << "\n";
  return kExitRuntime;
}

int cmd_emit_plots(const std::string& log_path, const std::string& out_path) {
  std::ifstream in(log_path);
  if (!in) throw psf::ConfigError("cannot open " + log_path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  psf::emit_plot_data(psf::logs_from_json(buffer.str()), out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"predictive safety filter toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string mode;
  bool trace = false;
  int port = 8080;
  std::string log_path = "out/episodes.json";
  std::string plot_path = "out/trajectory.csv";

  app.add_option("--config", config_path, "run configuration file (JSON)");
  app.add_option("--seed", seed, "override the configured seed")->each([&](const std::string&) {
    seed_set = true;
  });
  app.add_option("--mode", mode, "nominal|robust|unfiltered");
  app.add_flag("--trace", trace, "per-solve iteration traces to stderr");

  auto* run = app.add_subcommand("run", "run the learning benchmark");
  auto* tune = app.add_subcommand("tune", "Monte Carlo error-radius design");
  auto* verify = app.add_subcommand("verify-stab", "estimate the stabilizability certificate");
  auto* serve_cmd = app.add_subcommand("serve", "JSON-over-HTTP safe-environment service");
  serve_cmd->add_option("--port", port, "listen port");
  auto* plots = app.add_subcommand("emit-plots", "convert an episode log to plot CSV");
  plots->add_option("--log", log_path, "episode log (JSON)");
  plots->add_option("--out", plot_path, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    psf::RunConfig config = load_config(config_path, seed, seed_set, mode);
    std::ofstream trace_stream;
    if (trace) {
      std::filesystem::create_directories(config.output_dir);
      trace_stream.open(config.output_dir + "/solver_trace.log");
      config.solver.trace = &trace_stream;
    }
    if (run->parsed()) return cmd_run(config);
    if (tune->parsed()) return cmd_tune(config);
    if (verify->parsed()) return cmd_verify_stab(config);
    if (serve_cmd->parsed()) return psf::serve(config, port);
    if (plots->parsed()) return cmd_emit_plots(log_path, plot_path);
  } catch (const psf::ConfigError& e) {
    // Initial infeasibility gets its own exit code.
    const std::string what = e.what();
    std::cerr << "error: " << what << "\n";
    return what.find("infeasible") != std::string::npos ? kExitInfeasible : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
