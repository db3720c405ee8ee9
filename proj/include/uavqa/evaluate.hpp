#pragma once

// Received power, co-channel interference, SINR and rate for a complete
// (association, sub-channel, power) assignment.

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavqa/grid.hpp"
#include "uavqa/netmodel.hpp"

namespace uavqa {

/// Binary decision matrices: association (M x N), subchannel (M x K),
/// power (M x L).
struct NetworkAssignment {
  Grid<std::uint8_t> association;
  Grid<std::uint8_t> subchannel;
  Grid<std::uint8_t> power;

  static NetworkAssignment empty(std::size_t M, std::size_t N, std::size_t K, std::size_t L);

  /// Convenience constructor from per-entity choices. `serving_uav[n]` is the
  /// UAV of GU n; channel/level entries left empty mean "none".
  static NetworkAssignment from_choices(std::size_t K, std::size_t L,
                                        const std::vector<std::size_t>& serving_uav,
                                        const std::vector<std::optional<std::size_t>>& channel_of_uav,
                                        const std::vector<std::optional<std::size_t>>& level_of_uav);

  std::size_t num_uavs() const noexcept { return association.rows(); }
  std::size_t num_gus() const noexcept { return association.cols(); }
  std::size_t num_subchannels() const noexcept { return subchannel.cols(); }
  std::size_t num_power_levels() const noexcept { return power.cols(); }

  /// Constraint violations, empty when feasible.
  std::vector<std::string> violations() const;
  bool feasible() const { return violations().empty(); }

  std::optional<std::size_t> serving_uav(std::size_t gu) const;
  std::optional<std::size_t> channel_of(std::size_t uav) const;
  std::optional<std::size_t> level_of(std::size_t uav) const;
};

class ConstraintViolation : public std::runtime_error {
 public:
  explicit ConstraintViolation(std::vector<std::string> report);
  const std::vector<std::string>& report() const noexcept { return report_; }

 private:
  std::vector<std::string> report_;
};

struct LinkReport {
  std::size_t gu = 0;
  std::optional<std::size_t> uav;
  std::optional<std::size_t> subchannel;
  std::optional<double> power_dbm;
  double signal_w = 0.0;
  double interference_w = 0.0;
  double sinr = 0.0;
  double rate = 0.0;  // bits/s/Hz
};

/// Co-channel interference at `gu` on `subchannel`: every UAV other than the
/// GU's serving UAV that occupies the sub-channel contributes gain x power.
double interference(const NetworkAssignment& a, const Grid<double>& gains, const RadioParams& radio,
                    std::size_t gu, std::size_t subchannel);

/// One report per GU. Throws ConstraintViolation on an infeasible assignment.
std::vector<LinkReport> link_reports(const NetworkAssignment& a, const Grid<double>& gains,
                                     const RadioParams& radio, double noise_w);

/// Sum over served links of log2(1 + SINR). GUs whose UAV has no channel or
/// power level contribute 0.
double sum_rate(const NetworkAssignment& a, const Grid<double>& gains, const RadioParams& radio,
                double noise_w);

/// Columns: gu, uav, subchannel, power_dbm, signal_w, interference_w, sinr_db, rate.
void write_link_csv(std::ostream& os, const std::vector<LinkReport>& links);

}  // namespace uavqa
