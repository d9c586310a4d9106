#include "psf/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "psf/errors.hpp"
#include "psf/ocp.hpp"

namespace psf {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

// Accepts either a plain number (SI units / radians) or a string of the form
// "<value> deg".
double parse_quantity(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    std::istringstream in(s);
    double value;
    std::string unit;
    in >> value >> unit;
    if (in.fail() || (unit != "deg" && unit != "rad" && !unit.empty())) {
      throw ConfigError("config: cannot parse quantity '" + s + "'");
    }
    return unit == "deg" ? value * kDegToRad : value;
  }
  throw ConfigError("config: quantity must be a number or a unit string");
}

Eigen::VectorXd parse_vector(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = parse_quantity(j[i]);
  return v;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.noise_var = Eigen::VectorXd::Constant(2, 1e-6);
  c.state_lower = Eigen::VectorXd(2);
  c.state_lower << -60.0 * kDegToRad, -10.0;
  c.state_upper = Eigen::VectorXd(2);
  c.state_upper << 185.0 * kDegToRad, 10.0;
  c.input_lower = Eigen::VectorXd::Constant(1, -0.6);
  c.input_upper = Eigen::VectorXd::Constant(1, 0.6);
  c.terminal_lower = Eigen::VectorXd(2);
  c.terminal_lower << -30.0 * kDegToRad, -30.0 * kDegToRad;
  c.terminal_upper = Eigen::VectorXd(2);
  c.terminal_upper << 30.0 * kDegToRad, 30.0 * kDegToRad;
  c.x0 = Eigen::VectorXd::Zero(2);
  return c;
}

RunConfig RunConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  RunConfig c = defaults();
  try {
    if (j.contains("plant")) {
      const auto& p = j["plant"];
      if (p.value("type", "pendulum") != "pendulum") {
        throw ConfigError("config: only the pendulum plant is built in");
      }
      c.pendulum.h = p.value("h", c.pendulum.h);
      c.pendulum.gravity = p.value("gravity", c.pendulum.gravity);
      c.pendulum.length = p.value("length", c.pendulum.length);
      c.pendulum.mass = p.value("mass", c.pendulum.mass);
      c.pendulum.friction = p.value("friction", c.pendulum.friction);
      c.pendulum.u_max = p.value("u_max", c.pendulum.u_max);
    }
    if (j.contains("prior")) {
      c.prior_lambda = j["prior"].value("lambda", c.prior_lambda);
      if (j["prior"].contains("noise_var")) c.noise_var = parse_vector(j["prior"]["noise_var"]);
    }
    if (j.contains("constraints")) {
      const auto& k = j["constraints"];
      if (k.contains("state")) {
        c.state_lower = parse_vector(k["state"]["lower"]);
        c.state_upper = parse_vector(k["state"]["upper"]);
      }
      if (k.contains("input")) {
        c.input_lower = parse_vector(k["input"]["lower"]);
        c.input_upper = parse_vector(k["input"]["upper"]);
      }
      if (k.contains("terminal")) {
        c.terminal_lower = parse_vector(k["terminal"]["lower"]);
        c.terminal_upper = parse_vector(k["terminal"]["upper"]);
      }
    }
    if (j.contains("schedule")) {
      c.rho = j["schedule"].value("rho", c.rho);
      c.eps = j["schedule"].value("eps", c.eps);
      c.horizon = j["schedule"].value("horizon", c.horizon);
    }
    if (j.contains("confidence")) {
      c.p_level = j["confidence"].value("p_s", c.p_level);
      c.beta = j["confidence"].value("beta", c.beta);
      c.error_radius = j["confidence"].value("radius", c.error_radius);
    }
    c.episodes = j.value("episodes", c.episodes);
    c.episode_steps = j.value("episode_steps", c.episode_steps);
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    if (j.contains("x0")) c.x0 = parse_vector(j["x0"]);
    if (j.contains("mode")) {
      const std::string m = j["mode"].get<std::string>();
      if (m == "nominal") {
        c.mode = RunMode::Nominal;
      } else if (m == "robust") {
        c.mode = RunMode::Robust;
      } else if (m == "unfiltered") {
        c.mode = RunMode::Unfiltered;
      } else {
        throw ConfigError("config: unknown mode '" + m + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  // Validation.
  if (c.state_lower.size() != c.state_upper.size() ||
      c.terminal_lower.size() != c.state_lower.size() ||
      c.input_lower.size() != c.input_upper.size() || c.x0.size() != c.state_lower.size()) {
    throw ConfigError("config: inconsistent dimensions");
  }
  if (c.noise_var.size() != c.state_lower.size()) {
    throw ConfigError("config: noise_var dimension mismatch");
  }
  if (c.episodes < 1 || c.episode_steps < 1) {
    throw ConfigError("config: episodes and episode_steps must be positive");
  }
  if (!(c.p_level > 0.0 && c.p_level < 1.0)) {
    throw ConfigError("config: p_s must be in (0,1)");
  }
  TighteningSchedule schedule(c.rho, c.eps, c.horizon);  // validates eps_N < 1
  (void)schedule;
  ErrorBall ball(c.error_radius);
  (void)ball;
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

std::string RunConfig::to_json() const {
  nlohmann::json j;
  j["plant"] = {{"type", "pendulum"},   {"h", pendulum.h},
                {"gravity", pendulum.gravity}, {"length", pendulum.length},
                {"mass", pendulum.mass},       {"friction", pendulum.friction},
                {"u_max", pendulum.u_max}};
  j["prior"] = {{"lambda", prior_lambda}, {"noise_var", vector_to_json(noise_var)}};
  j["constraints"] = {
      {"state", {{"lower", vector_to_json(state_lower)}, {"upper", vector_to_json(state_upper)}}},
      {"input", {{"lower", vector_to_json(input_lower)}, {"upper", vector_to_json(input_upper)}}},
      {"terminal",
       {{"lower", vector_to_json(terminal_lower)}, {"upper", vector_to_json(terminal_upper)}}}};
  j["schedule"] = {{"rho", rho}, {"eps", eps}, {"horizon", horizon}};
  j["confidence"] = {{"p_s", p_level}, {"beta", beta}, {"radius", error_radius}};
  j["episodes"] = episodes;
  j["episode_steps"] = episode_steps;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["x0"] = vector_to_json(x0);
  j["mode"] = mode == RunMode::Nominal ? "nominal"
              : mode == RunMode::Robust ? "robust"
                                        : "unfiltered";
  return j.dump(2);
}

FeatureMap RunConfig::make_features() const { return FeatureMap::pendulum_quintic(); }

DynamicsBelief RunConfig::make_belief() const {
  return DynamicsBelief(make_features(), prior_lambda, noise_var);
}

Polytope RunConfig::make_state_set() const { return Polytope::box(state_lower, state_upper); }

Polytope RunConfig::make_input_set() const { return Polytope::box(input_lower, input_upper); }

TerminalSet RunConfig::make_terminal_set() const {
  return TerminalSet{Polytope::box(terminal_lower, terminal_upper)};
}

TighteningSchedule RunConfig::make_schedule() const {
  return TighteningSchedule(rho, eps, horizon);
}

OcpSpec RunConfig::make_ocp_template(const DynamicsBelief& belief) const {
  OcpSpec spec(make_state_set(), make_input_set(), make_schedule(), make_terminal_set(),
               ErrorBall(error_radius));
  spec.belief = &belief;
  spec.beta = beta;
  spec.mode = mode == RunMode::Nominal ? OcpMode::Nominal : OcpMode::Robust;
  spec.horizon = horizon;
  spec.x0 = x0;
  spec.u_proposed = Eigen::VectorXd::Zero(input_lower.size());
  return spec;
}

PlantFn RunConfig::make_plant() const { return make_pendulum(pendulum); }

TerminalPolicy RunConfig::make_terminal_policy() const {
  const int m = static_cast<int>(input_lower.size());
  return [m](int, const Eigen::VectorXd&, const Eigen::VectorXd&) -> Eigen::VectorXd {
    return Eigen::VectorXd::Zero(m);
  };
}

}  // namespace psf
