// Command-line front end: scenario generation, the two solver stages, the
// full pipeline, sweeps, the clustering table and QUBO export.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "uavqa/allocation.hpp"
#include "uavqa/clustering.hpp"
#include "uavqa/evaluate.hpp"
#include "uavqa/experiments.hpp"
#include "uavqa/io.hpp"
#include "uavqa/qubo.hpp"

using namespace uavqa;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string scenario;
  std::string clustering;
  std::optional<std::uint64_t> seed;
  std::string solver = "sa";
  std::optional<std::size_t> sweeps;
  std::optional<std::size_t> restarts;
  std::optional<double> tol;
  std::string out;
  bool oracle = false;
  std::string mode = "aggregate";
  std::string problem = "clustering";
  double lambda_p = 0.0;
  double lambda_i = 0.0;
  double lambda_p2 = 0.0;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void emit(const Json& j, const Options& o, const std::string& file) {
  if (o.out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json_file(fs::path(o.out) / file, j);
  }
}

void write_text(const fs::path& path, const auto& writer) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  writer(os);
}

Scenario load_scenario(const Options& o) {
  if (!o.scenario.empty()) return scenario_from_json(read_json_file(o.scenario));
  ScenarioConfig c = o.config.empty() ? ScenarioConfig{} : scenario_config_from_json(read_json_file(o.config));
  return generate_scenario(c);
}

SamplerSpec sampler_spec(const Options& o) {
  SolverParams p;
  if (o.sweeps) p.sa_sweeps = *o.sweeps;
  if (o.restarts) p.sa_restarts = *o.restarts;
  SamplerSpec spec = roster_sampler(o.solver, p, o.seed.value_or(0));
  spec.sa.validate();
  return spec;
}

DinkelbachOptions dinkelbach_options(const Options& o) {
  DinkelbachOptions d;
  if (o.tol) d.tol = *o.tol;
  d.mode = scaling_mode_from_string(o.mode);
  return d;
}

ClusterAssignment load_or_nearest(const Options& o, const Scenario& s) {
  if (o.clustering.empty()) return nearest_uav_assignment(s);
  ClusterAssignment a = cluster_assignment_from_json(read_json_file(o.clustering));
  if (a.association.rows() != s.num_uavs() || a.association.cols() != s.num_gus())
    throw UsageError("clustering does not match the scenario shape");
  a.objective = clustering_objective(a.association, distance_matrix(s));
  return a;
}

ClusterAssignment run_cluster(const Options& o, const Scenario& s) {
  if (o.solver == "kmeanspp") {
    const auto t0 = std::chrono::steady_clock::now();
    ClusterAssignment a = kmeanspp(s, s.num_uavs(), o.seed.value_or(0));
    a.solver_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return a;
  }
  return cluster(s, Sampler(sampler_spec(o)));
}

// Brute-force cross-check of the clustering stage when the instance is small.
Json cluster_oracle(const Scenario& s, const ClusterAssignment& a) {
  const ClusterAssignment nearest = nearest_uav_assignment(s);
  Json j{{"nearest_objective", nearest.objective},
         {"poor_matching_pct", 100.0 * poor_matching_fraction(a, s)},
         {"matches_nearest", a.objective <= nearest.objective + 1e-9 * std::max(1.0, nearest.objective)}};
  if (s.num_uavs() * s.num_gus() <= 20) {
    const auto bound = penalty_bound_clustering(s, PenaltyMethod::Enumerated);
    const SampleSet set = solve_exhaustive(build_clustering_qubo(s, bound.chosen));
    j["exhaustive_objective"] = decode_clustering(set.best().bits, distance_matrix(s), "exhaustive").objective;
    j["lambda_p_enumerated"] = bound.chosen;
  } else {
    j["exhaustive_objective"] = nullptr;
  }
  return j;
}

// Best N/D over every feasible allocation state when M*K*L is small.
Json allocation_oracle(const Scenario& s, const ClusterAssignment& a, const AllocationPlan& plan) {
  const FractionalObjective obj = fractional_objective(s, a);
  if (obj.vars.size() > 20) return Json{{"best_ratio", nullptr}};
  ExhaustiveOptions ex;
  ex.keep_lowest = 0;
  ex.max_vars = 20;
  const SampleSet all = solve_exhaustive(build_allocation_qubo(obj, 0.0, 1.0), ex);
  double best = 0.0;
  for (const auto& smp : all.samples)
    if (allocation_feasible(smp.bits, obj.vars))
      best = std::max(best, obj.numerator_at(smp.bits) / obj.denominator_at(smp.bits));
  const double ratio = plan.numerator / plan.denominator;
  return Json{{"best_ratio", best},
              {"plan_ratio", ratio},
              {"attains_best", ratio >= best * (1.0 - 1e-9)}};
}

void write_energy_histogram(const fs::path& path, const Scenario& s, const ClusterAssignment& a,
                            const AllocationPlan& plan, const Sampler& sampler) {
  const FractionalObjective obj = fractional_objective(s, a);
  SampleSet set = sampler.sample(build_allocation_qubo(obj, plan.lambda_I, plan.lambda_p2), 99);
  mark_feasibility(set, [&](std::span<const std::uint8_t> b) { return allocation_feasible(b, obj.vars); });
  write_text(path, [&](std::ostream& os) { emit_plotdata(os, "energy_histogram", {}, &set); });
}

int cmd_gen(const Options& o) {
  ScenarioConfig c = o.config.empty() ? ScenarioConfig{} : scenario_config_from_json(read_json_file(o.config));
  if (o.seed) c.seed = *o.seed;
  emit(to_json(generate_scenario(c)), o, "scenario.json");
  return 0;
}

int cmd_cluster(const Options& o) {
  const Scenario s = load_scenario(o);
  const ClusterAssignment a = run_cluster(o, s);
  Json j = to_json(a);
  j["poor_matching_pct"] = 100.0 * poor_matching_fraction(a, s);
  if (o.oracle) j["oracle"] = cluster_oracle(s, a);
  emit(j, o, "clustering.json");
  return 0;
}

int cmd_allocate(const Options& o) {
  const Scenario s = load_scenario(o);
  const ClusterAssignment a = load_or_nearest(o, s);
  const Sampler sampler(sampler_spec(o));
  DinkelbachOptions d = dinkelbach_options(o);
  if (!o.out.empty()) {
    d.on_qubo = [&](std::size_t it, int attempt, const QuboModel& q) {
      const fs::path p = fs::path(o.out) / "qubo" / ("iter" + std::to_string(it) + "_try" +
                                                     std::to_string(attempt) + ".qubo");
      fs::create_directories(p.parent_path());
      export_qubo_file(q, p);
    };
  }
  const AllocationPlan plan = dinkelbach_solve(s, a, sampler, d);
  Json j = to_json(plan, s.radio);
  if (o.oracle) j["oracle"] = allocation_oracle(s, a, plan);
  emit(j, o, "plan.json");
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    write_text(dir / "plan.csv", [&](std::ostream& os) { write_plan_csv(os, plan, s.radio); });
    const auto links = link_reports(to_network_assignment(a, plan, s.radio.num_subchannels, s.radio.num_power_levels()),
                                    gain_matrix(s).linear_gain, s.radio, s.radio.noise_w());
    write_text(dir / "links.csv", [&](std::ostream& os) { write_link_csv(os, links); });
    write_energy_histogram(dir / "energy_histogram.csv", s, a, plan, sampler);
  }
  return 0;
}

int cmd_pipeline(const Options& o) {
  const Scenario s = load_scenario(o);
  PipelineParams p;
  p.allocation = dinkelbach_options(o);
  p.stream = o.seed.value_or(0);
  PipelineResult r;
  if (o.solver == "kmeanspp") {
    Options alloc = o;
    alloc.solver = "sa";
    r = pipeline_kmeanspp(s, Sampler(sampler_spec(alloc)), p);
  } else {
    const Sampler sampler(sampler_spec(o));
    r = pipeline(s, sampler, sampler, p);
  }
  Json j{{"clustering", to_json(r.clustering)},
         {"plan", to_json(r.plan, s.radio)},
         {"sum_rate", r.sum_rate},
         {"poor_matching_pct", 100.0 * poor_matching_fraction(r.clustering, s)},
         {"cluster_time_s", r.cluster_time_s},
         {"alloc_time_s", r.alloc_time_s}};
  if (o.oracle) {
    j["oracle"] = {{"clustering", cluster_oracle(s, r.clustering)},
                   {"allocation", allocation_oracle(s, r.clustering, r.plan)}};
  }
  emit(j, o, "pipeline.json");
  return 0;
}

ExperimentConfig load_experiment(const Options& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : experiment_config_from_json(read_json_file(o.config));
  if (o.seed) c.master_seed = *o.seed;
  if (o.sweeps) c.params.sa_sweeps = *o.sweeps;
  if (o.restarts) c.params.sa_restarts = *o.restarts;
  if (o.tol) c.params.tol = *o.tol;
  if (!o.out.empty()) c.out_dir = o.out;
  c.validate();
  return c;
}

int cmd_sweep(Options o, bool solver_given) {
  ExperimentConfig c = load_experiment(o);
  if (solver_given) c.roster = {o.solver};
  const auto records = sweep(c);
  if (!c.out_dir.empty()) {
    for (const char* kind : {"sumrate_vs_uavs", "sumrate_vs_gus", "runtime_vs_uavs"})
      write_text(c.out_dir / (std::string(kind) + ".csv"),
                 [&](std::ostream& os) { emit_plotdata(os, kind, records); });
    write_json_file(c.out_dir / "config.json", to_json(c));
  } else {
    write_aggregate_csv(std::cout, aggregate(records));
  }
  std::size_t failures = 0;
  for (const auto& r : records) failures += r.status != "ok";
  if (failures) std::cerr << Json{{"warning", {{"failed_runs", failures}}}}.dump() << '\n';
  return 0;
}

int cmd_table2(const Options& o) {
  const ExperimentConfig c = load_experiment(o);
  const auto rows = report_clustering_table(c);
  if (c.out_dir.empty()) write_clustering_table_csv(std::cout, rows);
  return 0;
}

int cmd_export_qubo(const Options& o) {
  const Scenario s = load_scenario(o);
  QuboModel q;
  if (o.problem == "clustering") {
    const double lp =
        o.lambda_p > 0.0 ? o.lambda_p : penalty_bound_clustering(s, PenaltyMethod::HeuristicBound).chosen;
    q = build_clustering_qubo(s, lp);
  } else if (o.problem == "allocation") {
    const ClusterAssignment a = load_or_nearest(o, s);
    const FractionalObjective obj = fractional_objective(s, a);
    const double lp2 = o.lambda_p2 > 0.0
                           ? o.lambda_p2
                           : penalty_bound_allocation(obj, o.lambda_i, PenaltyMethod::HeuristicBound).chosen;
    q = build_allocation_qubo(obj, o.lambda_i, lp2);
  } else {
    throw UsageError("--problem must be clustering or allocation");
  }
  if (o.out.empty()) {
    write_qubo(std::cout, q);
  } else {
    export_qubo_file(q, o.out);
  }
  return 0;
}

void print_error(const std::string& type, const std::string& message) {
  std::cerr << Json{{"error", {{"type", type}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV network clustering and resource allocation with QUBO samplers"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config (scenario config, or experiment config for sweep/table2)");
    sub->add_option("--seed", o.seed, "Seed (scenario seed for gen, master seed for sweep/table2, else solver)");
    sub->add_option("--out", o.out, "Output directory (file for export-qubo); stdout when omitted");
  };
  auto solver_flags = [&](CLI::App* sub) {
    sub->add_option("--solver", o.solver, "exhaustive | sd | sa | kmeanspp")
        ->check(CLI::IsMember({"exhaustive", "sd", "sa", "kmeanspp"}));
    sub->add_option("--sweeps", o.sweeps, "SA sweeps per restart");
    sub->add_option("--restarts", o.restarts, "SA restarts");
  };
  auto scenario_flag = [&](CLI::App* sub) {
    sub->add_option("--scenario", o.scenario, "Scenario JSON written by gen (overrides --config)");
  };
  auto alloc_flags = [&](CLI::App* sub) {
    sub->add_option("--tol", o.tol, "Relative tolerance of the parametric iteration");
    sub->add_option("--mode", o.mode, "aggregate | per-term")->check(CLI::IsMember({"aggregate", "per-term"}));
  };

  auto* gen = app.add_subcommand("gen", "Generate a scenario JSON");
  common(gen);
  auto* cl = app.add_subcommand("cluster", "Associate GUs with UAVs");
  common(cl);
  scenario_flag(cl);
  solver_flags(cl);
  cl->add_flag("--oracle", o.oracle, "Cross-check against nearest-UAV and exhaustive results");
  auto* al = app.add_subcommand("allocate", "Choose sub-channel and power level per UAV");
  common(al);
  scenario_flag(al);
  solver_flags(al);
  alloc_flags(al);
  al->add_option("--clustering", o.clustering, "Clustering JSON (nearest-UAV association when omitted)");
  al->add_flag("--oracle", o.oracle, "Cross-check the ratio against enumeration (M*K*L <= 20)");
  auto* pl = app.add_subcommand("pipeline", "Cluster, then allocate");
  common(pl);
  scenario_flag(pl);
  solver_flags(pl);
  alloc_flags(pl);
  pl->add_flag("--oracle", o.oracle, "Enable brute-force cross-checks where the instance is small");
  auto* sw = app.add_subcommand("sweep", "Run an experiment sweep");
  common(sw);
  solver_flags(sw);
  sw->add_option("--tol", o.tol, "Relative tolerance of the parametric iteration");
  auto* t2 = app.add_subcommand("table2", "Clustering comparison table");
  common(t2);
  t2->add_option("--sweeps", o.sweeps, "SA sweeps per restart");
  t2->add_option("--restarts", o.restarts, "SA restarts");
  auto* ex = app.add_subcommand("export-qubo", "Write a clustering or allocation QUBO");
  common(ex);
  scenario_flag(ex);
  ex->add_option("--problem", o.problem, "clustering | allocation");
  ex->add_option("--lambda-p", o.lambda_p, "Clustering penalty (heuristic bound when omitted)");
  ex->add_option("--lambda-i", o.lambda_i, "Allocation scaling parameter");
  ex->add_option("--lambda-p2", o.lambda_p2, "Allocation penalty (heuristic bound when omitted)");
  ex->add_option("--clustering", o.clustering, "Clustering JSON for the allocation problem");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (*gen) return cmd_gen(o);
    if (*cl) return cmd_cluster(o);
    if (*al) return cmd_allocate(o);
    if (*pl) return cmd_pipeline(o);
    if (*sw) return cmd_sweep(o, sw->count("--solver") > 0);
    if (*t2) return cmd_table2(o);
    if (*ex) return cmd_export_qubo(o);
  } catch (const UsageError& e) {
    print_error("usage", e.what());
    return 2;
  } catch (const ConfigError& e) {
    print_error("config", e.what());
    return 3;
  } catch (const NoFeasibleSample& e) {
    print_error("infeasible", e.what());
    return 4;
  } catch (const std::exception& e) {
    print_error("runtime", e.what());
    return 1;
  }
  return 0;
}
