#include "uavqa/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <thread>

#include "uavqa/format.hpp"
#include "uavqa/rng.hpp"

namespace uavqa {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void finish_allocation(const Scenario& scenario, const Sampler& alloc_sampler, const PipelineParams& params,
                       PipelineResult& out) {
  out.plan = dinkelbach_solve(scenario, out.clustering, alloc_sampler, params.allocation,
                              derive_seed(params.stream, 2));
  out.alloc_time_s = out.plan.solver_time_s;
  out.sum_rate = out.plan.sum_rate;
}

}  // namespace

PipelineResult pipeline(const Scenario& scenario, const Sampler& cluster_sampler, const Sampler& alloc_sampler,
                        const PipelineParams& params) {
  PipelineResult out;
  out.clustering = cluster(scenario, cluster_sampler, params.cluster, derive_seed(params.stream, 1));
  out.cluster_time_s = out.clustering.solver_time_s;
  finish_allocation(scenario, alloc_sampler, params, out);
  return out;
}

PipelineResult pipeline_kmeanspp(const Scenario& scenario, const Sampler& alloc_sampler,
                                 const PipelineParams& params) {
  PipelineResult out;
  const auto t0 = std::chrono::steady_clock::now();
  out.clustering = kmeanspp(scenario, scenario.num_uavs(), derive_seed(params.stream, 1));
  out.clustering.solver_time_s = seconds_since(t0);
  out.cluster_time_s = out.clustering.solver_time_s;
  finish_allocation(scenario, alloc_sampler, params, out);
  return out;
}

SamplerSpec roster_sampler(const std::string& solver, const SolverParams& params, std::uint64_t seed) {
  SamplerSpec spec;
  spec.kind = sampler_kind_from_string(solver);
  spec.seed = seed;
  spec.sa.sweeps = params.sa_sweeps;
  spec.sa.restarts = params.sa_restarts;
  spec.sd_max_rounds = params.sd_max_rounds;
  spec.exhaustive.max_vars = params.exhaustive_max_vars;
  return spec;
}

void ExperimentConfig::validate() const {
  scenario.radio.validate();
  if (roster.empty()) throw std::invalid_argument("experiment roster must not be empty");
  if (seeds.empty()) throw std::invalid_argument("experiment needs at least one seed");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw std::invalid_argument("experiment seeds must be distinct");
  for (const auto& s : roster)
    if (s != "kmeanspp") sampler_kind_from_string(s);
  for (auto v : num_uavs)
    if (v == 0) throw std::invalid_argument("num_uavs entries must be positive");
  for (auto v : num_gus)
    if (v == 0) throw std::invalid_argument("num_gus entries must be positive");
  for (auto v : num_subchannels)
    if (v == 0) throw std::invalid_argument("num_subchannels entries must be positive");
  if (params.sa_sweeps == 0 || params.sa_restarts == 0 || params.bench_sa_restarts == 0)
    throw std::invalid_argument("SA sweeps and restarts must be positive");
  if (!(params.tol > 0.0) || params.max_iter == 0) throw std::invalid_argument("tol and max_iter must be positive");
}

std::uint64_t scenario_seed(std::uint64_t master, std::uint64_t seed) {
  return derive_seed(derive_seed(master, 1), seed);
}

std::uint64_t solver_seed(std::uint64_t master, std::uint64_t seed) { return derive_seed(derive_seed(master, 2), seed); }

std::vector<SweepPoint> sweep_points(const ExperimentConfig& config) {
  auto axis = [](const std::vector<std::size_t>& v, std::size_t fallback) {
    return v.empty() ? std::vector<std::size_t>{fallback} : v;
  };
  std::vector<SweepPoint> out;
  for (auto k : axis(config.num_subchannels, static_cast<std::size_t>(config.scenario.radio.num_subchannels)))
    for (auto n : axis(config.num_gus, static_cast<std::size_t>(config.scenario.num_gus)))
      for (auto m : axis(config.num_uavs, static_cast<std::size_t>(config.scenario.num_uavs)))
        out.push_back({m, n, k});
  return out;
}

Scenario scenario_for(const ExperimentConfig& config, const SweepPoint& point, std::uint64_t seed) {
  ScenarioConfig sc = config.scenario;
  sc.num_uavs = static_cast<int>(point.num_uavs);
  sc.num_gus = static_cast<int>(point.num_gus);
  sc.radio.num_subchannels = static_cast<int>(point.num_subchannels);
  sc.seed = scenario_seed(config.master_seed, seed);
  return generate_scenario(sc);
}

namespace {

PipelineParams pipeline_params(const ExperimentConfig& config) {
  PipelineParams p;
  p.allocation.tol = config.params.tol;
  p.allocation.max_iter = config.params.max_iter;
  p.allocation.mode = config.params.scaling;
  return p;
}

}  // namespace

RunRecord run_one(const ExperimentConfig& config, const SweepPoint& point, const std::string& solver,
                  std::uint64_t seed) {
  RunRecord rec;
  rec.point = point;
  rec.solver = solver;
  rec.seed = seed;
  try {
    const Scenario scenario = scenario_for(config, point, seed);
    const std::uint64_t s_seed = solver_seed(config.master_seed, seed);
    PipelineParams params = pipeline_params(config);
    PipelineResult r;
    if (solver == "kmeanspp") {
      params.stream = s_seed;
      r = pipeline_kmeanspp(scenario, Sampler(roster_sampler("sa", config.params, s_seed)), params);
    } else {
      const Sampler sampler(roster_sampler(solver, config.params, s_seed));
      r = pipeline(scenario, sampler, sampler, params);
    }
    rec.sum_rate = r.sum_rate;
    rec.cluster_objective = r.clustering.objective;
    rec.poor_matching_pct = 100.0 * poor_matching_fraction(r.clustering, scenario);
    rec.dinkelbach_iters = r.plan.dinkelbach_iters;
    rec.residual_F = r.plan.residual_F;
    rec.lambda_I = r.plan.lambda_I;
    rec.cluster_time_s = r.cluster_time_s;
    rec.alloc_time_s = r.alloc_time_s;
    rec.wall_time_s = r.cluster_time_s + r.alloc_time_s;
  } catch (const std::exception& e) {
    rec.status = e.what();
  }
  return rec;
}

namespace {

// Runs task(i) for i in [0, count) on a pool; results land in fixed slots.
template <typename Task>
void run_pool(std::size_t count, std::size_t threads, Task task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  for (auto& th : pool) th.join();
}

void write_file(const std::filesystem::path& path, const auto& writer) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  writer(os);
}

}  // namespace

std::vector<RunRecord> sweep(const ExperimentConfig& config) {
  config.validate();
  struct Job {
    SweepPoint point;
    std::string solver;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& p : sweep_points(config))
    for (const auto& s : config.roster)
      for (auto seed : config.seeds) jobs.push_back({p, s, seed});

  std::vector<RunRecord> records(jobs.size());
  run_pool(jobs.size(), config.threads,
           [&](std::size_t i) { records[i] = run_one(config, jobs[i].point, jobs[i].solver, jobs[i].seed); });

  if (!config.out_dir.empty()) {
    write_file(config.out_dir / "records.csv", [&](std::ostream& os) { write_records_csv(os, records); });
    write_file(config.out_dir / "aggregate.csv", [&](std::ostream& os) { write_aggregate_csv(os, aggregate(records)); });
  }
  return records;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

struct Stats {
  double mean = 0.0, std = 0.0;
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

}  // namespace

void write_records_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "num_uavs,num_gus,num_subchannels,solver,seed,status,sum_rate,cluster_objective,poor_matching_pct,"
        "dinkelbach_iters,residual_F,lambda_I,cluster_time_s,alloc_time_s,wall_time_s\n";
  for (const auto& r : records) {
    os << r.point.num_uavs << ',' << r.point.num_gus << ',' << r.point.num_subchannels << ',' << csv_field(r.solver)
       << ',' << r.seed << ',' << csv_field(r.status) << ',' << fmt_double(r.sum_rate) << ','
       << fmt_double(r.cluster_objective) << ',' << fmt_double(r.poor_matching_pct) << ',' << r.dinkelbach_iters
       << ',' << fmt_double(r.residual_F) << ',' << fmt_double(r.lambda_I) << ',' << fmt_double(r.cluster_time_s)
       << ',' << fmt_double(r.alloc_time_s) << ',' << fmt_double(r.wall_time_s) << '\n';
  }
}

std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records) {
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const auto& r : records) {
    Key key{r.point.num_uavs, r.point.num_gus, r.point.num_subchannels, r.solver};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }
  std::vector<AggregateRow> rows;
  for (const auto& key : order) {
    AggregateRow row;
    const auto& members = groups[key];
    row.point = members.front()->point;
    row.solver = members.front()->solver;
    std::vector<double> rate, poor, wall, ct, at;
    for (const RunRecord* r : members) {
      ++row.runs;
      if (r->status != "ok") {
        ++row.failures;
        continue;
      }
      rate.push_back(r->sum_rate);
      poor.push_back(r->poor_matching_pct);
      wall.push_back(r->wall_time_s);
      ct.push_back(r->cluster_time_s);
      at.push_back(r->alloc_time_s);
    }
    const Stats sr = stats(rate), wt = stats(wall);
    row.sum_rate_mean = sr.mean;
    row.sum_rate_std = sr.std;
    row.poor_matching_pct_mean = stats(poor).mean;
    row.wall_time_s_mean = wt.mean;
    row.wall_time_s_std = wt.std;
    row.cluster_time_s_mean = stats(ct).mean;
    row.alloc_time_s_mean = stats(at).mean;
    rows.push_back(row);
  }
  return rows;
}

void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
  os << "num_uavs,num_gus,num_subchannels,solver,runs,failures,sum_rate_mean,sum_rate_std,poor_matching_pct_mean,"
        "cluster_time_s_mean,alloc_time_s_mean,wall_time_s_mean,wall_time_s_std\n";
  for (const auto& r : rows) {
    os << r.point.num_uavs << ',' << r.point.num_gus << ',' << r.point.num_subchannels << ',' << csv_field(r.solver)
       << ',' << r.runs << ',' << r.failures << ',' << fmt_double(r.sum_rate_mean) << ','
       << fmt_double(r.sum_rate_std) << ',' << fmt_double(r.poor_matching_pct_mean) << ','
       << fmt_double(r.cluster_time_s_mean) << ',' << fmt_double(r.alloc_time_s_mean) << ','
       << fmt_double(r.wall_time_s_mean) << ',' << fmt_double(r.wall_time_s_std) << '\n';
  }
}

std::vector<ClusteringTableRow> report_clustering_table(const ExperimentConfig& config) {
  config.validate();
  const SweepPoint point = sweep_points(config).front();
  const auto& sp = config.params;
  const bool exact = point.num_uavs * point.num_gus <= sp.exhaustive_max_vars;

  struct Algo {
    std::string name;
    std::optional<SamplerSpec> spec;  // empty: K-means++
  };
  SamplerSpec sd;
  sd.kind = SamplerKind::SteepestDescent;
  sd.sd_max_rounds = sp.sd_max_rounds;
  SamplerSpec bench;
  bench.kind = SamplerKind::SimulatedAnnealing;
  bench.sa.sweeps = sp.sa_sweeps;
  bench.sa.restarts = sp.bench_sa_restarts;
  bench.sa.split_components = false;
  SamplerSpec qa = roster_sampler(exact ? "exhaustive" : "sa", sp, 0);
  const std::vector<Algo> algos{{"SD", sd}, {"SA", bench}, {"K-means++", std::nullopt}, {"QA-QUBO", qa}};

  std::vector<ClusteringTableRow> rows;
  for (const auto& algo : algos) {
    std::vector<double> poor, obj, time;
    for (auto seed : config.seeds) {
      const Scenario scenario = scenario_for(config, point, seed);
      const std::uint64_t s_seed = solver_seed(config.master_seed, seed);
      ClusterAssignment a;
      if (algo.spec) {
        SamplerSpec spec = *algo.spec;
        spec.seed = s_seed;
        a = cluster(scenario, Sampler(spec), {}, 1);
      } else {
        const auto t0 = std::chrono::steady_clock::now();
        a = kmeanspp(scenario, scenario.num_uavs(), derive_seed(s_seed, 1));
        a.solver_time_s = seconds_since(t0);
      }
      poor.push_back(100.0 * poor_matching_fraction(a, scenario));
      obj.push_back(a.objective);
      time.push_back(a.solver_time_s);
    }
    rows.push_back({algo.name, stats(poor).mean, stats(obj).mean, 0.0, stats(time).mean});
  }
  double lo = rows.front().objective, hi = lo;
  for (const auto& r : rows) {
    lo = std::min(lo, r.objective);
    hi = std::max(hi, r.objective);
  }
  for (auto& r : rows) r.normalized_objective = hi > lo ? (r.objective - lo) / (hi - lo) : 0.0;

  if (!config.out_dir.empty())
    write_file(config.out_dir / "table2.csv", [&](std::ostream& os) { write_clustering_table_csv(os, rows); });
  return rows;
}

void write_clustering_table_csv(std::ostream& os, const std::vector<ClusteringTableRow>& rows) {
  os << "algorithm,poor_matching_pct,normalized_objective,objective,running_time_s\n";
  for (const auto& r : rows)
    os << csv_field(r.algorithm) << ',' << fmt_double(r.poor_matching_pct) << ','
       << fmt_double(r.normalized_objective) << ',' << fmt_double(r.objective) << ','
       << fmt_double(r.running_time_s) << '\n';
}

void emit_plotdata(std::ostream& os, const std::string& kind, const std::vector<RunRecord>& records,
                   const SampleSet* samples) {
  if (kind == "energy_histogram") {
    os << "series,energy,count\n";
    if (!samples) return;
    for (const auto& s : samples->samples) os << "all," << fmt_double(s.energy) << ',' << s.multiplicity << '\n';
    for (const auto& s : samples->samples)
      if (s.feasible.value_or(false)) os << "feasible," << fmt_double(s.energy) << ',' << s.multiplicity << '\n';
    return;
  }
  const auto rows = aggregate(records);
  if (kind == "sumrate_vs_uavs") {
    os << "num_subchannels,num_gus,solver,num_uavs,runs,sum_rate_mean,sum_rate_std\n";
    for (const auto& r : rows)
      os << r.point.num_subchannels << ',' << r.point.num_gus << ',' << csv_field(r.solver) << ','
         << r.point.num_uavs << ',' << r.runs - r.failures << ',' << fmt_double(r.sum_rate_mean) << ','
         << fmt_double(r.sum_rate_std) << '\n';
  } else if (kind == "sumrate_vs_gus") {
    os << "num_subchannels,num_uavs,solver,num_gus,runs,sum_rate_mean,sum_rate_std\n";
    for (const auto& r : rows)
      os << r.point.num_subchannels << ',' << r.point.num_uavs << ',' << csv_field(r.solver) << ','
         << r.point.num_gus << ',' << r.runs - r.failures << ',' << fmt_double(r.sum_rate_mean) << ','
         << fmt_double(r.sum_rate_std) << '\n';
  } else if (kind == "runtime_vs_uavs") {
    os << "num_subchannels,num_gus,solver,num_uavs,runs,cluster_time_s_mean,alloc_time_s_mean,wall_time_s_mean\n";
    for (const auto& r : rows)
      os << r.point.num_subchannels << ',' << r.point.num_gus << ',' << csv_field(r.solver) << ','
         << r.point.num_uavs << ',' << r.runs - r.failures << ',' << fmt_double(r.cluster_time_s_mean) << ','
         << fmt_double(r.alloc_time_s_mean) << ',' << fmt_double(r.wall_time_s_mean) << '\n';
  } else {
    throw std::invalid_argument("unknown plot kind '" + kind + "'");
  }
}

}  // namespace uavqa
