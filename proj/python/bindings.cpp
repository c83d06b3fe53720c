#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fchp/bench.hpp"
#include "fchp/cli.hpp"
#include "fchp/construct.hpp"
#include "fchp/errors.hpp"
#include "fchp/evaluate.hpp"
#include "fchp/exact.hpp"
#include "fchp/ils.hpp"
#include "fchp/io.hpp"
#include "fchp/tracegen.hpp"

namespace py = pybind11;
using fchp::Json;

namespace {

// Documents cross the boundary as JSON text; the Python package wraps them in dicts.
fchp::Instance instance_of(const std::string& text) { return fchp::instance_from_json(Json::parse(text)); }
fchp::Solution solution_of(const std::string& text) { return fchp::solution_from_json(Json::parse(text)); }

std::string evaluate(const std::string& instance, const std::string& solution) {
  return fchp::to_json(fchp::evaluate(instance_of(instance), solution_of(solution))).dump();
}

std::vector<std::string> violations(const std::string& instance, const std::string& solution) {
  std::vector<std::string> out;
  for (const auto& v : fchp::check_feasibility(instance_of(instance), solution_of(solution))) {
    out.push_back(v.to_string());
  }
  return out;
}

std::string construct(const std::string& instance, std::uint64_t seed) {
  fchp::Rng rng(seed);
  return fchp::to_json(fchp::construct_solution(instance_of(instance), rng)).dump();
}

std::string ils(const std::string& instance, int iters, int level_max, int delay, std::uint64_t seed,
                unsigned threads) {
  fchp::IlsConfig cfg;
  cfg.iter_max = iters;
  cfg.level_max = level_max;
  cfg.delay_d = delay;
  cfg.seed = seed;
  cfg.threads = threads;
  const auto inst = instance_of(instance);
  fchp::IlsResult r;
  {
    py::gil_scoped_release release;
    r = fchp::ils_solve(inst, cfg);
  }
  return Json{{"cost", fchp::to_json(r.cost)},
              {"assignments", fchp::to_json(r.best)},
              {"best_after_start", r.stats.best_after_start}}
      .dump();
}

std::string exact(const std::string& instance, std::int64_t node_limit) {
  fchp::ExactOptions opt;
  opt.node_limit = node_limit;
  const auto inst = instance_of(instance);
  fchp::ExactResult r;
  {
    py::gil_scoped_release release;
    r = fchp::exact_solve(inst, opt);
  }
  return Json{{"cost", r.cost}, {"proven", r.proven}, {"nodes", r.nodes}, {"assignments", fchp::to_json(r.solution)}}
      .dump();
}

std::string trace_csv(const std::string& config, std::optional<std::uint64_t> seed) {
  auto cfg = fchp::trace::config_from_json(Json::parse(config));
  if (seed) cfg.seed = *seed;
  return fchp::trace::to_csv(fchp::trace::generate_trace(cfg));
}

std::tuple<int, std::string, std::string> run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = fchp::cli::dispatch(args, out, err);
  }
  return {code, out.str(), err.str()};
}

}  // namespace

PYBIND11_MODULE(_fchp, m) {
  m.doc() = "Flash crowd handling: replica placement and server hiring solvers";

  auto base = py::register_exception<fchp::Error>(m, "FchpError", PyExc_RuntimeError);
  py::register_exception<fchp::Infeasible>(m, "Infeasible", base.ptr());
  py::register_exception<fchp::BudgetExhausted>(m, "BudgetExhausted", base.ptr());
  py::register_exception<fchp::InvalidInstance>(m, "InvalidInstance", base.ptr());
  py::register_exception<fchp::DomainError>(m, "DomainError", base.ptr());

  m.def("evaluate", &evaluate, py::arg("instance"), py::arg("solution"));
  m.def("violations", &violations, py::arg("instance"), py::arg("solution"));
  m.def("construct", &construct, py::arg("instance"), py::arg("seed") = 0);
  m.def("ils", &ils, py::arg("instance"), py::arg("iters") = 3, py::arg("level_max") = 7, py::arg("delay") = 1,
        py::arg("seed") = 0, py::arg("threads") = 0);
  m.def("exact", &exact, py::arg("instance"), py::arg("node_limit") = 5'000'000);
  m.def("compute_gap", &fchp::bench::compute_gap, py::arg("heuristic_total"), py::arg("reference_total"));
  m.def("trace_csv", &trace_csv, py::arg("config"), py::arg("seed") = py::none());
  m.def("run_cli", &run_cli, py::arg("args"));
}
