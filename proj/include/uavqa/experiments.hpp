#pragma once

// Two-stage pipeline (cluster, then allocate), sweeps over scenario sizes,
// the clustering comparison table and plot-ready CSV output.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "uavqa/allocation.hpp"
#include "uavqa/clustering.hpp"
#include "uavqa/netmodel.hpp"
#include "uavqa/solvers.hpp"

namespace uavqa {

struct PipelineParams {
  ClusterOptions cluster;
  DinkelbachOptions allocation;
  std::uint64_t stream = 0;
};

struct PipelineResult {
  ClusterAssignment clustering;
  AllocationPlan plan;
  double sum_rate = 0.0;
  double cluster_time_s = 0.0;  // sampler time only
  double alloc_time_s = 0.0;
};

PipelineResult pipeline(const Scenario& scenario, const Sampler& cluster_sampler, const Sampler& alloc_sampler,
                        const PipelineParams& params = {});

/// Clustering by K-means++ (one cluster per UAV), then allocation.
PipelineResult pipeline_kmeanspp(const Scenario& scenario, const Sampler& alloc_sampler,
                                 const PipelineParams& params = {});

struct SolverParams {
  std::size_t sa_sweeps = 1000;
  std::size_t sa_restarts = 20;
  std::size_t sd_max_rounds = 0;
  std::size_t exhaustive_max_vars = 24;
  double tol = 1e-6;
  std::size_t max_iter = 20;
  ScalingMode scaling = ScalingMode::Aggregate;
  /// Plain annealer of the clustering table: whole-model SA, this many restarts.
  std::size_t bench_sa_restarts = 20;
};

/// Sampler of a roster entry ("exhaustive", "sd", "sa"); `seed` is the
/// solver seed of the run.
SamplerSpec roster_sampler(const std::string& solver, const SolverParams& params, std::uint64_t seed);

struct ExperimentConfig {
  ScenarioConfig scenario;
  std::vector<std::size_t> num_uavs;         // empty: template value
  std::vector<std::size_t> num_gus;          // empty: template value
  std::vector<std::size_t> num_subchannels;  // empty: template value
  std::vector<std::string> roster{"sa", "sd"};
  std::vector<std::uint64_t> seeds{0};
  std::uint64_t master_seed = 1;
  SolverParams params;
  std::filesystem::path out_dir;
  std::size_t threads = 0;  // 0: hardware concurrency

  void validate() const;
};

/// Scenario seed and solver seed of run `seed`, independent of the sweep
/// point so every point sees the same GU draw for a given seed.
std::uint64_t scenario_seed(std::uint64_t master, std::uint64_t seed);
std::uint64_t solver_seed(std::uint64_t master, std::uint64_t seed);

struct SweepPoint {
  std::size_t num_uavs = 0;
  std::size_t num_gus = 0;
  std::size_t num_subchannels = 0;
};

std::vector<SweepPoint> sweep_points(const ExperimentConfig& config);
Scenario scenario_for(const ExperimentConfig& config, const SweepPoint& point, std::uint64_t seed);

struct RunRecord {
  SweepPoint point;
  std::string solver;
  std::uint64_t seed = 0;
  std::string status = "ok";  // "ok" or the error message
  double sum_rate = 0.0;
  double cluster_objective = 0.0;
  double poor_matching_pct = 0.0;
  std::size_t dinkelbach_iters = 0;
  double residual_F = 0.0;
  double lambda_I = 0.0;
  double cluster_time_s = 0.0;
  double alloc_time_s = 0.0;
  double wall_time_s = 0.0;
};

RunRecord run_one(const ExperimentConfig& config, const SweepPoint& point, const std::string& solver,
                  std::uint64_t seed);

/// Every point x solver x seed, in that nesting order. Failures are recorded
/// in `status`. Writes records.csv and aggregate.csv when out_dir is set.
std::vector<RunRecord> sweep(const ExperimentConfig& config);

/// Columns: num_uavs, num_gus, num_subchannels, solver, seed, status,
/// sum_rate, cluster_objective, poor_matching_pct, dinkelbach_iters,
/// residual_F, lambda_I, cluster_time_s, alloc_time_s, wall_time_s.
void write_records_csv(std::ostream& os, const std::vector<RunRecord>& records);

struct AggregateRow {
  SweepPoint point;
  std::string solver;
  std::size_t runs = 0;
  std::size_t failures = 0;
  double sum_rate_mean = 0.0, sum_rate_std = 0.0;
  double poor_matching_pct_mean = 0.0;
  double wall_time_s_mean = 0.0, wall_time_s_std = 0.0;
  double cluster_time_s_mean = 0.0, alloc_time_s_mean = 0.0;
};

/// Mean and sample standard deviation over successful runs, rows ordered by
/// first appearance of (point, solver).
std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records);
void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows);

struct ClusteringTableRow {
  std::string algorithm;
  double poor_matching_pct = 0.0;
  double objective = 0.0;
  double normalized_objective = 0.0;
  double running_time_s = 0.0;
};

/// SD, plain SA, K-means++ and the QUBO sampler ("exhaustive" when M*N fits
/// the exhaustive cap, "sa" otherwise), averaged over the config seeds at
/// the first sweep point. Writes table2.csv when out_dir is set.
std::vector<ClusteringTableRow> report_clustering_table(const ExperimentConfig& config);

/// Columns: algorithm, poor_matching_pct, normalized_objective,
/// objective, running_time_s.
void write_clustering_table_csv(std::ostream& os, const std::vector<ClusteringTableRow>& rows);

/// kinds: sumrate_vs_uavs, sumrate_vs_gus, runtime_vs_uavs take `records`;
/// energy_histogram takes `samples` (feasibility flags set). Throws
/// std::invalid_argument on an unknown kind.
void emit_plotdata(std::ostream& os, const std::string& kind, const std::vector<RunRecord>& records,
                   const SampleSet* samples = nullptr);

}  // namespace uavqa
