#include "uavqa/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "uavqa/rng.hpp"

namespace uavqa {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

bool finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

}  // namespace

void RadioParams::validate() const {
  require(carrier_freq_hz > 0.0 && std::isfinite(carrier_freq_hz), "carrier_freq_hz must be positive");
  require(light_speed_mps > 0.0, "light_speed_mps must be positive");
  require(env_a >= 0.0, "env_a must be non-negative");
  require(env_b > 0.0, "env_b must be positive");
  require(eta_nlos_db >= eta_los_db, "eta_nlos_db must be >= eta_los_db");
  require(!power_levels_dbm.empty(), "at least one power level is required");
  for (std::size_t l = 1; l < power_levels_dbm.size(); ++l)
    require(power_levels_dbm[l] > power_levels_dbm[l - 1], "power levels must be strictly increasing");
  require(num_subchannels >= 1, "num_subchannels must be >= 1");
  require(altitude_m > 0.0, "altitude_m must be positive");
  require(coverage_radius_m > 0.0, "coverage_radius_m must be positive");
  require(max_gus_per_uav >= 1, "max_gus_per_uav must be >= 1");
  require(std::isfinite(noise_dbm), "noise_dbm must be finite");
}

double RadioParams::noise_w() const { return dbm_to_watts(noise_dbm); }

double RadioParams::power_w(std::size_t level) const {
  return dbm_to_watts(power_levels_dbm.at(level));
}

void Scenario::validate() const {
  radio.validate();
  require(!uav_positions.empty(), "scenario needs at least one UAV");
  require(!gu_positions.empty(), "scenario needs at least one GU");
  for (const auto& p : uav_positions) require(finite(p), "UAV coordinates must be finite");
  for (const auto& p : gu_positions) require(finite(p), "GU coordinates must be finite");
}

std::vector<std::string> Scenario::warnings() const {
  std::vector<std::string> out;
  const Grid<double> d = distance_matrix(*this);
  std::vector<int> load(num_uavs(), 0);
  for (std::size_t n = 0; n < num_gus(); ++n) {
    std::size_t best = 0;
    for (std::size_t m = 1; m < num_uavs(); ++m)
      if (d(m, n) < d(best, n)) best = m;
    ++load[best];
  }
  for (std::size_t m = 0; m < load.size(); ++m) {
    if (load[m] > radio.max_gus_per_uav) {
      std::ostringstream os;
      os << "UAV " << m << " is nearest to " << load[m] << " GUs (max_gus_per_uav = "
         << radio.max_gus_per_uav << ")";
      out.push_back(os.str());
    }
  }
  return out;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

double distance(Point2 u, Point2 v, double altitude) {
  const double dx = u.x - v.x;
  const double dy = u.y - v.y;
  return std::sqrt(dx * dx + dy * dy + altitude * altitude);
}

double los_probability(double d, double h, double a, double b) {
  if (!(h > 0.0)) throw std::invalid_argument("altitude must be positive");
  if (d < h) throw std::invalid_argument("link length shorter than altitude");
  const double elevation_deg = (180.0 / std::numbers::pi) * std::asin(h / d);
  return 1.0 / (1.0 + a * std::exp(-b * (elevation_deg - a)));
}

double free_space_loss_db(double d, const RadioParams& radio) {
  return 20.0 * std::log10(4.0 * std::numbers::pi * radio.carrier_freq_hz * d / radio.light_speed_mps);
}

double mean_pathloss_db(double d, const RadioParams& radio) {
  const double fs = free_space_loss_db(d, radio);
  const double rho = los_probability(d, radio.altitude_m, radio.env_a, radio.env_b);
  return rho * (fs + radio.eta_los_db) + (1.0 - rho) * (fs + radio.eta_nlos_db);
}

Grid<double> distance_matrix(const Scenario& scenario) {
  Grid<double> d(scenario.num_uavs(), scenario.num_gus());
  for (std::size_t m = 0; m < scenario.num_uavs(); ++m)
    for (std::size_t n = 0; n < scenario.num_gus(); ++n)
      d(m, n) = distance(scenario.uav_positions[m], scenario.gu_positions[n], scenario.radio.altitude_m);
  return d;
}

GainMatrix gain_matrix(const Scenario& scenario) {
  const Grid<double> d = distance_matrix(scenario);
  GainMatrix g{Grid<double>(d.rows(), d.cols()), Grid<double>(d.rows(), d.cols())};
  for (std::size_t m = 0; m < d.rows(); ++m) {
    for (std::size_t n = 0; n < d.cols(); ++n) {
      const double loss = mean_pathloss_db(d(m, n), scenario.radio);
      g.pathloss_db(m, n) = loss;
      g.linear_gain(m, n) = std::pow(10.0, -loss / 10.0);
    }
  }
  return g;
}

Scenario generate_scenario(const ScenarioConfig& config) {
  config.radio.validate();
  require(config.num_uavs >= 1, "num_uavs must be >= 1");
  require(config.num_gus >= 1, "num_gus must be >= 1");
  require(config.area_width_m > 0.0 && config.area_height_m > 0.0, "area must have positive extent");

  Scenario s;
  s.radio = config.radio;
  s.seed = config.seed;

  const Point2 centre{config.area_width_m / 2.0, config.area_height_m / 2.0};
  double radius = config.placement_radius_m;
  if (radius < 0.0) {
    radius = std::min(config.area_width_m, config.area_height_m) / 2.0 - config.radio.coverage_radius_m;
    if (radius < 0.0) radius = 0.0;
  }
  const int M = config.num_uavs;
  if (M == 1) {
    s.uav_positions.push_back(centre);
  } else {
    for (int m = 0; m < M; ++m) {
      const double theta = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * m / M;
      s.uav_positions.push_back({centre.x + radius * std::cos(theta), centre.y + radius * std::sin(theta)});
    }
  }

  Rng rng(derive_seed(config.seed, 0));
  s.gu_positions.reserve(static_cast<std::size_t>(config.num_gus));
  for (int n = 0; n < config.num_gus; ++n) {
    const double x = rng.uniform(0.0, config.area_width_m);
    const double y = rng.uniform(0.0, config.area_height_m);
    s.gu_positions.push_back({x, y});
  }
  return s;
}

}  // namespace uavqa
