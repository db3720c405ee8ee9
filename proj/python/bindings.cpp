// Python module: JSON-shaped dicts in and out, the same forms the CLI writes.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uavqa/allocation.hpp"
#include "uavqa/clustering.hpp"
#include "uavqa/experiments.hpp"
#include "uavqa/io.hpp"
#include "uavqa/netmodel.hpp"
#include "uavqa/qubo.hpp"
#include "uavqa/solvers.hpp"

namespace py = pybind11;
using namespace uavqa;

namespace {

Json from_py(const py::object& o) {
  const py::object dumps = py::module_::import("json").attr("dumps");
  return Json::parse(dumps(o).cast<std::string>());
}

py::object to_py(const Json& j) {
  const py::object loads = py::module_::import("json").attr("loads");
  return loads(j.dump());
}

Sampler make_sampler(const std::string& solver, std::uint64_t seed, std::size_t sweeps, std::size_t restarts) {
  SolverParams p;
  p.sa_sweeps = sweeps;
  p.sa_restarts = restarts;
  return Sampler(roster_sampler(solver, p, seed));
}

Json qubo_json(const QuboModel& q) {
  Json lin = Json::array(), quad = Json::array();
  for (const auto& [i, c] : q.linear()) lin.push_back({i, c});
  for (const auto& [ij, c] : q.quadratic()) quad.push_back({ij.first, ij.second, c});
  return {{"num_vars", q.num_vars()}, {"linear", lin}, {"quadratic", quad}, {"offset", q.offset()},
          {"labels", q.labels()}};
}

QuboModel qubo_from(const Json& j) {
  QuboModel q(j.at("num_vars").get<std::size_t>());
  for (const auto& e : j.value("linear", Json::array())) q.add_linear(e.at(0).get<std::size_t>(), e.at(1).get<double>());
  for (const auto& e : j.value("quadratic", Json::array()))
    q.add_quadratic(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(), e.at(2).get<double>());
  q.add_offset(j.value("offset", 0.0));
  q.normalize();
  return q;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "UAV network clustering and resource allocation via QUBO";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NoFeasibleSample>(m, "NoFeasibleSample", PyExc_RuntimeError);
  py::register_exception<CapExceeded>(m, "CapExceeded", PyExc_RuntimeError);

  m.def(
      "generate_scenario",
      [](const py::object& config) { return to_py(to_json(generate_scenario(scenario_config_from_json(from_py(config))))); },
      py::arg("config") = py::dict(), "Scenario dict from a scenario config dict.");

  m.def(
      "gain_matrix",
      [](const py::object& scenario) {
        const Grid<double> g = gain_matrix(scenario_from_json(from_py(scenario))).linear_gain;
        std::vector<std::vector<double>> out(g.rows(), std::vector<double>(g.cols()));
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < g.cols(); ++c) out[r][c] = g(r, c);
        return out;
      },
      py::arg("scenario"), "M x N linear channel gains.");

  m.def(
      "cluster",
      [](const py::object& scenario, const std::string& solver, std::uint64_t seed, std::size_t sweeps,
         std::size_t restarts) {
        const Scenario s = scenario_from_json(from_py(scenario));
        const ClusterAssignment a = cluster(s, make_sampler(solver, seed, sweeps, restarts), {}, 1);
        Json j = to_json(a);
        j["poor_matching_pct"] = 100.0 * poor_matching_fraction(a, s);
        return to_py(j);
      },
      py::arg("scenario"), py::arg("solver") = "sa", py::arg("seed") = 0, py::arg("sweeps") = 1000,
      py::arg("restarts") = 20, "GU-to-UAV association by the clustering QUBO.");

  m.def(
      "allocate",
      [](const py::object& scenario, const py::object& clustering, const std::string& solver, std::uint64_t seed,
         const std::string& mode, std::size_t sweeps, std::size_t restarts) {
        const Scenario s = scenario_from_json(from_py(scenario));
        const ClusterAssignment a = cluster_assignment_from_json(from_py(clustering));
        DinkelbachOptions o;
        o.mode = scaling_mode_from_string(mode);
        return to_py(to_json(dinkelbach_solve(s, a, make_sampler(solver, seed, sweeps, restarts), o, 2), s.radio));
      },
      py::arg("scenario"), py::arg("clustering"), py::arg("solver") = "sa", py::arg("seed") = 0,
      py::arg("mode") = "aggregate", py::arg("sweeps") = 1000, py::arg("restarts") = 20,
      "Sub-channel and power plan for a fixed association.");

  m.def(
      "pipeline",
      [](const py::object& scenario, const std::string& solver, std::uint64_t seed, std::size_t sweeps,
         std::size_t restarts) {
        const Scenario s = scenario_from_json(from_py(scenario));
        const Sampler sampler = make_sampler(solver, seed, sweeps, restarts);
        const PipelineResult r = solver == "kmeanspp" ? pipeline_kmeanspp(s, make_sampler("sa", seed, sweeps, restarts))
                                                      : pipeline(s, sampler, sampler);
        return to_py({{"clustering", to_json(r.clustering)},
                      {"plan", to_json(r.plan, s.radio)},
                      {"sum_rate", r.sum_rate},
                      {"cluster_time_s", r.cluster_time_s},
                      {"alloc_time_s", r.alloc_time_s}});
      },
      py::arg("scenario"), py::arg("solver") = "sa", py::arg("seed") = 0, py::arg("sweeps") = 1000,
      py::arg("restarts") = 20, "Clustering followed by allocation.");

  m.def(
      "sweep",
      [](const py::object& config) {
        const auto records = sweep(experiment_config_from_json(from_py(config)));
        Json out = Json::array();
        for (const auto& r : records)
          out.push_back({{"num_uavs", r.point.num_uavs},
                         {"num_gus", r.point.num_gus},
                         {"num_subchannels", r.point.num_subchannels},
                         {"solver", r.solver},
                         {"seed", r.seed},
                         {"status", r.status},
                         {"sum_rate", r.sum_rate},
                         {"poor_matching_pct", r.poor_matching_pct},
                         {"dinkelbach_iters", r.dinkelbach_iters},
                         {"lambda_I", r.lambda_I},
                         {"wall_time_s", r.wall_time_s}});
        return to_py(out);
      },
      py::arg("config"), "Run records of an experiment config.");

  m.def(
      "clustering_table",
      [](const py::object& config) {
        Json out = Json::array();
        for (const auto& r : report_clustering_table(experiment_config_from_json(from_py(config))))
          out.push_back({{"algorithm", r.algorithm},
                         {"poor_matching_pct", r.poor_matching_pct},
                         {"normalized_objective", r.normalized_objective},
                         {"objective", r.objective},
                         {"running_time_s", r.running_time_s}});
        return to_py(out);
      },
      py::arg("config"), "Clustering comparison rows.");

  m.def(
      "clustering_qubo",
      [](const py::object& scenario, double lambda_p) {
        const Scenario s = scenario_from_json(from_py(scenario));
        if (lambda_p <= 0.0) lambda_p = penalty_bound_clustering(s, PenaltyMethod::HeuristicBound).chosen;
        return to_py(qubo_json(build_clustering_qubo(s, lambda_p)));
      },
      py::arg("scenario"), py::arg("lambda_p") = 0.0,
      "Clustering QUBO as {num_vars, linear [[i, c]], quadratic [[i, j, c]], offset, labels}.");

  m.def(
      "solve_qubo",
      [](const py::object& qubo, const std::string& solver, std::uint64_t seed, std::size_t sweeps,
         std::size_t restarts) {
        const SampleSet set = make_sampler(solver, seed, sweeps, restarts).sample(qubo_from(from_py(qubo)));
        const Sample& b = set.best();
        return py::make_tuple(std::vector<int>(b.bits.begin(), b.bits.end()), b.energy);
      },
      py::arg("qubo"), py::arg("solver") = "sa", py::arg("seed") = 0, py::arg("sweeps") = 1000,
      py::arg("restarts") = 20, "Lowest-energy (bits, energy) of a QUBO dict.");
}
