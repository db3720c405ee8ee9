#pragma once

// Scenario generation and the probabilistic air-to-ground channel.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavqa/grid.hpp"

namespace uavqa {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

/// Radio and channel parameters. Defaults are the dense-urban values used
/// throughout the experiments (2 GHz carrier, a=9.6, b=0.16, 1/20 dB excess
/// loss, 10..30 dBm in 5 dB steps, -96 dBm noise, 100 m altitude).
struct RadioParams {
  double carrier_freq_hz = 2.0e9;
  double light_speed_mps = 3.0e8;
  double env_a = 9.6;
  double env_b = 0.16;
  double eta_los_db = 1.0;
  double eta_nlos_db = 20.0;
  double noise_dbm = -96.0;
  std::vector<double> power_levels_dbm{10.0, 15.0, 20.0, 25.0, 30.0};
  int num_subchannels = 2;
  double altitude_m = 100.0;
  double coverage_radius_m = 500.0;
  int max_gus_per_uav = 30;

  /// Throws std::invalid_argument on the first broken invariant.
  void validate() const;

  std::size_t num_power_levels() const noexcept { return power_levels_dbm.size(); }
  double noise_w() const;
  double power_w(std::size_t level) const;
};

struct Scenario {
  std::vector<Point2> uav_positions;
  std::vector<Point2> gu_positions;
  RadioParams radio;
  std::uint64_t seed = 0;

  std::size_t num_uavs() const noexcept { return uav_positions.size(); }
  std::size_t num_gus() const noexcept { return gu_positions.size(); }

  void validate() const;
  /// Human-readable notes for soft limits (e.g. more GUs closest to a UAV
  /// than max_gus_per_uav). Never throws.
  std::vector<std::string> warnings() const;
};

/// Inputs of generate_scenario. `placement_radius_m < 0` selects the default
/// area_half_width - coverage_radius.
struct ScenarioConfig {
  RadioParams radio;
  int num_uavs = 7;
  int num_gus = 100;
  double area_width_m = 2500.0;
  double area_height_m = 2500.0;
  double placement_radius_m = -1.0;
  std::uint64_t seed = 1;
};

struct GainMatrix {
  Grid<double> linear_gain;   // M x N, dimensionless
  Grid<double> pathloss_db;   // M x N
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

double distance(Point2 u, Point2 v, double altitude);

/// LoS probability for a link of 3-D length d from altitude h. Throws when
/// d < h.
double los_probability(double d, double h, double a, double b);

double free_space_loss_db(double d, const RadioParams& radio);

/// LoS/NLoS mixture of the two dB losses, weighted by the LoS probability.
double mean_pathloss_db(double d, const RadioParams& radio);

Grid<double> distance_matrix(const Scenario& scenario);
GainMatrix gain_matrix(const Scenario& scenario);

/// UAVs on the vertices of a regular polygon centred in the area (a single
/// UAV sits at the centre); GUs i.i.d. uniform over the area.
Scenario generate_scenario(const ScenarioConfig& config);

}  // namespace uavqa
