#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "psf/benchmark.hpp"
#include "psf/config.hpp"
#include "psf/errors.hpp"
#include "psf/filter.hpp"
#include "psf/stabilizability.hpp"
#include "psf/tuning.hpp"

namespace py = pybind11;
using namespace psf;

PYBIND11_MODULE(_core, m) {
  m.doc() = "predictive safety filter toolkit";

  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::enum_<RunMode>(m, "RunMode")
      .value("Nominal", RunMode::Nominal)
      .value("Robust", RunMode::Robust)
      .value("Unfiltered", RunMode::Unfiltered);

  py::enum_<SolveStatus>(m, "SolveStatus")
      .value("Optimal", SolveStatus::Optimal)
      .value("Feasible", SolveStatus::Feasible)
      .value("Infeasible", SolveStatus::Infeasible)
      .value("MaxIter", SolveStatus::MaxIter)
      .value("NumericalFailure", SolveStatus::NumericalFailure);

  py::enum_<FilterMode>(m, "FilterMode")
      .value("Full", FilterMode::Full)
      .value("Shrinking", FilterMode::Shrinking)
      .value("Terminal", FilterMode::Terminal);

  py::class_<RunConfig>(m, "RunConfig")
      .def_static("defaults", &RunConfig::defaults)
      .def_static("from_json", &RunConfig::from_json)
      .def_static("load", &RunConfig::load)
      .def("to_json", &RunConfig::to_json)
      .def_readwrite("prior_lambda", &RunConfig::prior_lambda)
      .def_readwrite("rho", &RunConfig::rho)
      .def_readwrite("eps", &RunConfig::eps)
      .def_readwrite("horizon", &RunConfig::horizon)
      .def_readwrite("beta", &RunConfig::beta)
      .def_readwrite("p_level", &RunConfig::p_level)
      .def_readwrite("error_radius", &RunConfig::error_radius)
      .def_readwrite("episodes", &RunConfig::episodes)
      .def_readwrite("episode_steps", &RunConfig::episode_steps)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("mode", &RunConfig::mode)
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def_readwrite("x0", &RunConfig::x0)
      .def("make_belief", &RunConfig::make_belief)
      .def("make_plant", &RunConfig::make_plant);

  py::class_<Transition>(m, "Transition")
      .def(py::init([](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& x_next) {
             return Transition{x, u, x_next};
           }),
           py::arg("x"), py::arg("u"), py::arg("x_next"))
      .def_readwrite("x", &Transition::x)
      .def_readwrite("u", &Transition::u)
      .def_readwrite("x_next", &Transition::x_next);

  py::class_<DynamicsBelief>(m, "DynamicsBelief")
      .def("update", &DynamicsBelief::update)
      .def("reset", &DynamicsBelief::reset)
      .def("predict_mean", &DynamicsBelief::predict_mean)
      .def("predict_std", &DynamicsBelief::predict_std)
      .def("sample_parameters", &DynamicsBelief::sample_parameters)
      .def("to_checkpoint", &DynamicsBelief::to_checkpoint)
      .def("observation_count", &DynamicsBelief::observation_count);

  py::class_<FilterDecision>(m, "FilterDecision")
      .def_readonly("applied", &FilterDecision::applied)
      .def_readonly("proposed", &FilterDecision::proposed)
      .def_readonly("intervened", &FilterDecision::intervened)
      .def_readonly("modification", &FilterDecision::modification)
      .def_readonly("horizon_used", &FilterDecision::horizon_used)
      .def_readonly("status", &FilterDecision::status)
      .def_readonly("mode", &FilterDecision::mode)
      .def_readonly("solve_ms", &FilterDecision::solve_ms);

  py::class_<SafetyFilter>(m, "SafetyFilter")
      .def(py::init([](const RunConfig& config, const DynamicsBelief& belief,
                       const Eigen::VectorXd& x0) {
             return SafetyFilter(config.make_ocp_template(belief), config.make_terminal_policy(),
                                 x0);
           }),
           py::arg("config"), py::arg("belief"), py::arg("x0"), py::keep_alive<1, 3>())
      .def("filter_input", &SafetyFilter::filter_input)
      .def("certify", &SafetyFilter::certify)
      .def("mode", &SafetyFilter::mode)
      .def("last_feasible_time", &SafetyFilter::last_feasible_time);

  py::class_<StepRecord>(m, "StepRecord")
      .def_readonly("k", &StepRecord::k)
      .def_readonly("x", &StepRecord::x)
      .def_readonly("u_proposed", &StepRecord::u_proposed)
      .def_readonly("u_applied", &StepRecord::u_applied)
      .def_readonly("intervened", &StepRecord::intervened)
      .def_readonly("horizon_used", &StepRecord::horizon_used);

  py::class_<EpisodeLog>(m, "EpisodeLog")
      .def_readonly("episode", &EpisodeLog::episode)
      .def_readonly("switch_step", &EpisodeLog::switch_step)
      .def_readonly("steps", &EpisodeLog::steps)
      .def_readonly("objective", &EpisodeLog::objective)
      .def_readonly("violation_count", &EpisodeLog::violation_count)
      .def_readonly("intervention_count", &EpisodeLog::intervention_count);

  py::class_<BenchmarkResult>(m, "BenchmarkResult")
      .def_readonly("episodes", &BenchmarkResult::episodes)
      .def_readonly("best_objective", &BenchmarkResult::best_objective)
      .def_readonly("episodes_to_success", &BenchmarkResult::episodes_to_success);

  m.def("run_benchmark", &run_benchmark, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("pendulum_step", &pendulum_step, py::arg("params"), py::arg("x"), py::arg("u"));
  m.def("logs_to_json", &logs_to_json);

  py::class_<PendulumParams>(m, "PendulumParams")
      .def(py::init<>())
      .def_readwrite("h", &PendulumParams::h)
      .def_readwrite("gravity", &PendulumParams::gravity)
      .def_readwrite("length", &PendulumParams::length)
      .def_readwrite("mass", &PendulumParams::mass)
      .def_readwrite("friction", &PendulumParams::friction)
      .def_readwrite("u_max", &PendulumParams::u_max);
}
