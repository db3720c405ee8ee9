#pragma once

// Distance-based user clustering as a QUBO, its penalty factor, and the
// K-means++ baseline.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavqa/grid.hpp"
#include "uavqa/netmodel.hpp"
#include "uavqa/qubo.hpp"
#include "uavqa/solvers.hpp"

namespace uavqa {

struct ClusterAssignment {
  Grid<std::uint8_t> association;  // M x N, one UAV per GU
  double objective = 0.0;          // sum of associated distances
  std::string source;
  double solver_time_s = 0.0;  // sampler (or K-means) time, excluding model build

  std::vector<std::size_t> serving_uavs() const;
};

enum class PenaltyMethod { Enumerated, HeuristicBound };

std::string to_string(PenaltyMethod method);

struct PenaltyEstimate {
  double lower = 0.0;
  double upper = 0.0;
  double chosen = 0.0;
  PenaltyMethod method = PenaltyMethod::HeuristicBound;
};

class NoFeasibleSample : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Variable of X[m,n] in the clustering QUBO.
constexpr std::size_t clustering_var(std::size_t m, std::size_t n, std::size_t N) { return m * N + n; }

/// sum X[m,n] d[m,n] + lambda_p * sum_n (sum_m X[m,n] - 1)^2 over M*N variables.
QuboModel build_clustering_qubo(const Grid<double>& distances, double lambda_p);
QuboModel build_clustering_qubo(const Scenario& scenario, double lambda_p);

bool clustering_feasible(std::span<const std::uint8_t> bits, std::size_t M, std::size_t N);

/// Penalty range. Enumerated mode scans all 2^(M*N) states
/// (M*N <= max_vars); heuristic mode returns max d + 5%, which makes every
/// one-unit repair of a violated group profitable.
PenaltyEstimate penalty_bound_clustering(const Grid<double>& distances, PenaltyMethod method,
                                         std::size_t max_vars = 20);
PenaltyEstimate penalty_bound_clustering(const Scenario& scenario, PenaltyMethod method,
                                         std::size_t max_vars = 20);

double clustering_objective(const Grid<std::uint8_t>& association, const Grid<double>& distances);

ClusterAssignment decode_clustering(std::span<const std::uint8_t> bits, const Grid<double>& distances,
                                    std::string source);

struct ClusterOptions {
  /// <= 0 selects the heuristic bound.
  double lambda_p = 0.0;
  /// Extra attempts with lambda_p multiplied by escalation_factor when a run
  /// yields no feasible sample.
  int max_escalations = 3;
  double escalation_factor = 10.0;
};

/// Builds the QUBO, samples it, keeps feasible samples and decodes the
/// lowest-energy one. Throws NoFeasibleSample after the escalations.
ClusterAssignment cluster(const Scenario& scenario, const Sampler& sampler, const ClusterOptions& options = {},
                          std::uint64_t stream = 0);

/// Each GU to its minimum-distance UAV (lowest index on ties).
ClusterAssignment nearest_uav_assignment(const Scenario& scenario);

/// D^2 seeding plus Lloyd iterations on GU positions, then each cluster is
/// mapped to a distinct UAV greedily by centroid-UAV distance.
ClusterAssignment kmeanspp(const Scenario& scenario, std::size_t num_clusters, std::uint64_t seed,
                           std::size_t max_iters = 100);

/// Fraction of GUs not associated with a minimum-distance UAV.
double poor_matching_fraction(const ClusterAssignment& assignment, const Scenario& scenario);

}  // namespace uavqa
