#pragma once

// JSON forms of configs, scenarios and results.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "uavqa/allocation.hpp"
#include "uavqa/clustering.hpp"
#include "uavqa/experiments.hpp"
#include "uavqa/netmodel.hpp"

namespace uavqa {

using Json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Keys: carrier_freq_hz, num_gus, num_uavs, num_subchannels,
/// coverage_radius_m, env_a, env_b, eta_los_db, eta_nlos_db,
/// power_levels_dbm, noise_dbm, altitude_m, area_m (side or [w, h]), seed,
/// and optionally placement_radius_m, max_gus_per_uav, light_speed_mps.
/// Missing keys keep their defaults; unknown keys are an error.
ScenarioConfig scenario_config_from_json(const Json& j);
Json to_json(const ScenarioConfig& config);

Json to_json(const RadioParams& radio);
Json to_json(const Scenario& scenario);
Scenario scenario_from_json(const Json& j);

Json to_json(const ClusterAssignment& assignment);
ClusterAssignment cluster_assignment_from_json(const Json& j);

/// Per-UAV channel and power, lambda_I, iterations, residual and the trace.
Json to_json(const AllocationPlan& plan, const RadioParams& radio);

/// {"scenario": {...}, "num_uavs": [...], "num_gus": [...],
///  "num_subchannels": [...], "roster": [...], "seeds": [...],
///  "master_seed": n, "threads": n, "out_dir": "...", "solver": {...}}
ExperimentConfig experiment_config_from_json(const Json& j);
Json to_json(const ExperimentConfig& config);

SolverParams solver_params_from_json(const Json& j, SolverParams base = {});
Json to_json(const SolverParams& params);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace uavqa
