#include "psf/service.hpp"

#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "psf/benchmark.hpp"
#include "psf/errors.hpp"
#include "psf/filter.hpp"

namespace psf {

namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j, int expected_size) {
  if (!j.is_array() || static_cast<int>(j.size()) != expected_size) {
    throw ContractViolation("expected an array of length " + std::to_string(expected_size));
  }
  Eigen::VectorXd v(expected_size);
  for (int i = 0; i < expected_size; ++i) v(i) = j[i].get<double>();
  return v;
}

// One control session: filter, plant, clock, and the transition buffer for
// the next model update. Requests are serialized by a mutex.
struct Session {
  RunConfig config;
  DynamicsBelief belief;
  PlantFn plant;
  std::optional<SafetyFilter> filter;
  Eigen::VectorXd x;
  int k = 0;
  std::vector<Transition> buffer;

  explicit Session(const RunConfig& c) : config(c), belief(c.make_belief()), plant(c.make_plant()) {}

  void reset(const Eigen::VectorXd& x0) {
    filter.emplace(config.make_ocp_template(belief), config.make_terminal_policy(), x0);
    x = x0;
    k = 0;
  }
};

}  // namespace

int serve(const RunConfig& config, int port) {
  httplib::Server server;
  auto session = std::make_shared<Session>(config);
  auto mutex = std::make_shared<std::mutex>();

  auto respond_error = [](httplib::Response& res, int code, const std::string& message) {
    json body;
    body["error"] = message;
    res.status = code;
    res.set_content(body.dump(), "application/json");
  };

  server.Post("/reset", [=](const httplib::Request& req, httplib::Response& res) {
    std::scoped_lock lock(*mutex);
    try {
      const json body = json::parse(req.body);
      const Eigen::VectorXd x0 =
          vector_from_json(body.at("x0"), static_cast<int>(session->config.x0.size()));
      session->reset(x0);
      json out;
      out["x"] = vector_to_json(session->x);
      res.set_content(out.dump(), "application/json");
    } catch (const ConfigError& e) {
      respond_error(res, 422, e.what());  // infeasible startup
    } catch (const std::exception& e) {
      respond_error(res, 400, e.what());
    }
  });

  server.Post("/step", [=](const httplib::Request& req, httplib::Response& res) {
    std::scoped_lock lock(*mutex);
    try {
      if (!session->filter) {
        respond_error(res, 409, "step before reset");
        return;
      }
      const json body = json::parse(req.body);
      const Eigen::VectorXd u_proposed =
          vector_from_json(body.at("u_l"), static_cast<int>(session->config.input_lower.size()));
      auto [x_next, decision] =
          session->filter->safe_step(session->k, session->x, u_proposed, session->plant);
      session->buffer.push_back({session->x, decision.applied, x_next});
      session->x = x_next;
      ++session->k;
      json out;
      out["x"] = vector_to_json(session->x);
      out["u_applied"] = vector_to_json(decision.applied);
      out["intervened"] = decision.intervened;
      out["horizon"] = decision.horizon_used;
      out["status"] = status_name(decision.status);
      res.set_content(out.dump(), "application/json");
    } catch (const std::exception& e) {
      respond_error(res, 400, e.what());
    }
  });

  server.Get("/state", [=](const httplib::Request&, httplib::Response& res) {
    std::scoped_lock lock(*mutex);
    json out;
    if (session->filter) {
      out["x"] = vector_to_json(session->x);
      out["k"] = session->k;
      const FilterMode mode = session->filter->mode();
      out["mode"] = mode == FilterMode::Full       ? "full"
                    : mode == FilterMode::Shrinking ? "shrinking"
                                                    : "terminal";
    } else {
      out["mode"] = "idle";
    }
    res.set_content(out.dump(), "application/json");
  });

  server.Post("/learn", [=](const httplib::Request&, httplib::Response& res) {
    std::scoped_lock lock(*mutex);
    try {
      if (session->buffer.empty()) {
        respond_error(res, 409, "no buffered transitions");
        return;
      }
      session->belief.update(session->buffer);
      json out;
      out["transitions"] = session->buffer.size();
      session->buffer.clear();
      res.set_content(out.dump(), "application/json");
    } catch (const std::exception& e) {
      respond_error(res, 400, e.what());
    }
  });

  std::cout << "serving on port " << port << std::endl;
  if (!server.listen("0.0.0.0", port)) {
    std::cerr << "failed to bind port " << port << "\n";
    return 4;
  }
  return 0;
}

}  // namespace psf
