#include "uavqa/io.hpp"

#include <fstream>
#include <set>
#include <type_traits>

namespace uavqa {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
void read_key(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  if constexpr (std::is_unsigned_v<T>)
    if (j.at(key).is_number_integer() && j.at(key).get<long long>() < 0)
      throw ConfigError(std::string("key '") + key + "': must not be negative");
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("key '") + key + "': " + e.what());
  }
}

Json point_json(Point2 p) { return Json::array({p.x, p.y}); }

Point2 point_from(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("a position must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Json choices_json(const std::vector<std::optional<std::size_t>>& v) {
  Json out = Json::array();
  for (const auto& c : v) out.push_back(c ? Json(*c) : Json(nullptr));
  return out;
}

}  // namespace

ScenarioConfig scenario_config_from_json(const Json& j) {
  reject_unknown(j,
                 {"carrier_freq_hz", "num_gus", "num_uavs", "num_subchannels", "coverage_radius_m", "env_a", "env_b",
                  "eta_los_db", "eta_nlos_db", "power_levels_dbm", "noise_dbm", "altitude_m", "area_m", "seed",
                  "placement_radius_m", "max_gus_per_uav", "light_speed_mps"},
                 "scenario config");
  ScenarioConfig c;
  auto& r = c.radio;
  read_key(j, "carrier_freq_hz", r.carrier_freq_hz);
  read_key(j, "light_speed_mps", r.light_speed_mps);
  read_key(j, "num_subchannels", r.num_subchannels);
  read_key(j, "coverage_radius_m", r.coverage_radius_m);
  read_key(j, "env_a", r.env_a);
  read_key(j, "env_b", r.env_b);
  read_key(j, "eta_los_db", r.eta_los_db);
  read_key(j, "eta_nlos_db", r.eta_nlos_db);
  read_key(j, "power_levels_dbm", r.power_levels_dbm);
  read_key(j, "noise_dbm", r.noise_dbm);
  read_key(j, "altitude_m", r.altitude_m);
  read_key(j, "max_gus_per_uav", r.max_gus_per_uav);
  read_key(j, "num_gus", c.num_gus);
  read_key(j, "num_uavs", c.num_uavs);
  read_key(j, "placement_radius_m", c.placement_radius_m);
  read_key(j, "seed", c.seed);
  if (j.contains("area_m")) {
    const Json& a = j.at("area_m");
    if (a.is_number()) {
      c.area_width_m = c.area_height_m = a.get<double>();
    } else if (a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number()) {
      c.area_width_m = a[0].get<double>();
      c.area_height_m = a[1].get<double>();
    } else {
      throw ConfigError("key 'area_m': expected a number or [width, height]");
    }
  }
  try {
    r.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scenario config: ") + e.what());
  }
  if (c.num_uavs < 1 || c.num_gus < 1) throw ConfigError("scenario config: num_uavs and num_gus must be >= 1");
  return c;
}

Json to_json(const RadioParams& r) {
  return Json{{"carrier_freq_hz", r.carrier_freq_hz},
              {"light_speed_mps", r.light_speed_mps},
              {"num_subchannels", r.num_subchannels},
              {"coverage_radius_m", r.coverage_radius_m},
              {"env_a", r.env_a},
              {"env_b", r.env_b},
              {"eta_los_db", r.eta_los_db},
              {"eta_nlos_db", r.eta_nlos_db},
              {"power_levels_dbm", r.power_levels_dbm},
              {"noise_dbm", r.noise_dbm},
              {"altitude_m", r.altitude_m},
              {"max_gus_per_uav", r.max_gus_per_uav}};
}

Json to_json(const ScenarioConfig& c) {
  Json j = to_json(c.radio);
  j["num_uavs"] = c.num_uavs;
  j["num_gus"] = c.num_gus;
  j["area_m"] = Json::array({c.area_width_m, c.area_height_m});
  j["placement_radius_m"] = c.placement_radius_m;
  j["seed"] = c.seed;
  return j;
}

Json to_json(const Scenario& s) {
  Json uavs = Json::array(), gus = Json::array();
  for (auto p : s.uav_positions) uavs.push_back(point_json(p));
  for (auto p : s.gu_positions) gus.push_back(point_json(p));
  return Json{{"radio", to_json(s.radio)}, {"seed", s.seed}, {"uav_positions", uavs}, {"gu_positions", gus}};
}

Scenario scenario_from_json(const Json& j) {
  reject_unknown(j, {"radio", "seed", "uav_positions", "gu_positions"}, "scenario");
  Scenario s;
  try {
    const Json& r = j.at("radio");
    reject_unknown(r,
                   {"carrier_freq_hz", "light_speed_mps", "num_subchannels", "coverage_radius_m", "env_a", "env_b",
                    "eta_los_db", "eta_nlos_db", "power_levels_dbm", "noise_dbm", "altitude_m", "max_gus_per_uav"},
                   "scenario radio");
    read_key(r, "carrier_freq_hz", s.radio.carrier_freq_hz);
    read_key(r, "light_speed_mps", s.radio.light_speed_mps);
    read_key(r, "num_subchannels", s.radio.num_subchannels);
    read_key(r, "coverage_radius_m", s.radio.coverage_radius_m);
    read_key(r, "env_a", s.radio.env_a);
    read_key(r, "env_b", s.radio.env_b);
    read_key(r, "eta_los_db", s.radio.eta_los_db);
    read_key(r, "eta_nlos_db", s.radio.eta_nlos_db);
    read_key(r, "power_levels_dbm", s.radio.power_levels_dbm);
    read_key(r, "noise_dbm", s.radio.noise_dbm);
    read_key(r, "altitude_m", s.radio.altitude_m);
    read_key(r, "max_gus_per_uav", s.radio.max_gus_per_uav);
    read_key(j, "seed", s.seed);
    for (const auto& p : j.at("uav_positions")) s.uav_positions.push_back(point_from(p));
    for (const auto& p : j.at("gu_positions")) s.gu_positions.push_back(point_from(p));
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  return s;
}

Json to_json(const ClusterAssignment& a) {
  Json serving = Json::array();
  for (auto m : a.serving_uavs()) serving.push_back(m == SIZE_MAX ? Json(nullptr) : Json(m));
  return Json{{"num_uavs", a.association.rows()},
              {"serving_uav", serving},
              {"objective", a.objective},
              {"source", a.source},
              {"solver_time_s", a.solver_time_s}};
}

ClusterAssignment cluster_assignment_from_json(const Json& j) {
  try {
    const std::size_t M = j.at("num_uavs").get<std::size_t>();
    const Json& serving = j.at("serving_uav");
    ClusterAssignment a{Grid<std::uint8_t>(M, serving.size()), 0.0, j.value("source", std::string())};
    for (std::size_t n = 0; n < serving.size(); ++n) {
      if (serving[n].is_null()) continue;
      const auto m = serving[n].get<std::size_t>();
      if (m >= M) throw ConfigError("cluster assignment: UAV index out of range");
      a.association(m, n) = 1;
    }
    a.objective = j.value("objective", 0.0);
    a.solver_time_s = j.value("solver_time_s", 0.0);
    return a;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("cluster assignment: ") + e.what());
  }
}

Json to_json(const AllocationPlan& plan, const RadioParams& radio) {
  Json power_dbm = Json::array();
  for (const auto& l : plan.power_level_of_uav)
    power_dbm.push_back(l ? Json(radio.power_levels_dbm.at(*l)) : Json(nullptr));
  Json trace = Json::array();
  for (const auto& s : plan.trace)
    trace.push_back({{"iteration", s.iteration},
                     {"q", s.q},
                     {"lambda_p2", s.lambda_p2},
                     {"numerator", s.numerator},
                     {"denominator", s.denominator},
                     {"residual_F", s.residual_F},
                     {"best_energy", s.best_energy},
                     {"escalations", s.escalations}});
  return Json{{"subchannel", choices_json(plan.subchannel_of_uav)},
              {"power_level", choices_json(plan.power_level_of_uav)},
              {"power_dbm", power_dbm},
              {"lambda_I", plan.lambda_I},
              {"lambda_p2", plan.lambda_p2},
              {"iterations", plan.dinkelbach_iters},
              {"residual_F", plan.residual_F},
              {"converged", plan.converged},
              {"numerator", plan.numerator},
              {"denominator", plan.denominator},
              {"sum_rate", plan.sum_rate},
              {"solver_time_s", plan.solver_time_s},
              {"trace", trace}};
}

SolverParams solver_params_from_json(const Json& j, SolverParams p) {
  reject_unknown(j,
                 {"sa_sweeps", "sa_restarts", "sd_max_rounds", "exhaustive_max_vars", "tol", "max_iter", "scaling",
                  "bench_sa_restarts"},
                 "solver");
  read_key(j, "sa_sweeps", p.sa_sweeps);
  read_key(j, "sa_restarts", p.sa_restarts);
  read_key(j, "sd_max_rounds", p.sd_max_rounds);
  read_key(j, "exhaustive_max_vars", p.exhaustive_max_vars);
  read_key(j, "tol", p.tol);
  read_key(j, "max_iter", p.max_iter);
  read_key(j, "bench_sa_restarts", p.bench_sa_restarts);
  if (j.contains("scaling")) {
    try {
      p.scaling = scaling_mode_from_string(j.at("scaling").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("key 'scaling': ") + e.what());
    }
  }
  return p;
}

Json to_json(const SolverParams& p) {
  return Json{{"sa_sweeps", p.sa_sweeps},
              {"sa_restarts", p.sa_restarts},
              {"sd_max_rounds", p.sd_max_rounds},
              {"exhaustive_max_vars", p.exhaustive_max_vars},
              {"tol", p.tol},
              {"max_iter", p.max_iter},
              {"scaling", to_string(p.scaling)},
              {"bench_sa_restarts", p.bench_sa_restarts}};
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  reject_unknown(j,
                 {"scenario", "num_uavs", "num_gus", "num_subchannels", "roster", "seeds", "master_seed", "threads",
                  "out_dir", "solver"},
                 "experiment config");
  ExperimentConfig c;
  if (j.contains("scenario")) c.scenario = scenario_config_from_json(j.at("scenario"));
  read_key(j, "num_uavs", c.num_uavs);
  read_key(j, "num_gus", c.num_gus);
  read_key(j, "num_subchannels", c.num_subchannels);
  read_key(j, "roster", c.roster);
  read_key(j, "seeds", c.seeds);
  read_key(j, "master_seed", c.master_seed);
  read_key(j, "threads", c.threads);
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("solver")) c.params = solver_params_from_json(j.at("solver"));
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  return c;
}

Json to_json(const ExperimentConfig& c) {
  return Json{{"scenario", to_json(c.scenario)},
              {"num_uavs", c.num_uavs},
              {"num_gus", c.num_gus},
              {"num_subchannels", c.num_subchannels},
              {"roster", c.roster},
              {"seeds", c.seeds},
              {"master_seed", c.master_seed},
              {"threads", c.threads},
              {"out_dir", c.out_dir.string()},
              {"solver", to_json(c.params)}};
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

}  // namespace uavqa
