#pragma once

// Joint sub-channel / power-level selection as a QUBO, the fractional
// (signal over interference-plus-noise) scaling parameter found by a
// parametric iteration, and the one-choice-per-UAV penalty factor.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "uavqa/clustering.hpp"
#include "uavqa/evaluate.hpp"
#include "uavqa/grid.hpp"
#include "uavqa/netmodel.hpp"
#include "uavqa/qubo.hpp"
#include "uavqa/solvers.hpp"

namespace uavqa {

/// Flat index of X[m,k,l] is (m*K + k)*L + l.
struct AllocationVars {
  std::size_t M = 0, K = 0, L = 0;

  std::size_t size() const noexcept { return M * K * L; }
  std::size_t index(std::size_t m, std::size_t k, std::size_t l) const { return (m * K + k) * L + l; }
  std::tuple<std::size_t, std::size_t, std::size_t> decompose(std::size_t v) const {
    return {v / (K * L), (v / L) % K, v % L};
  }
  std::string label(std::size_t v) const;
  /// Variables of UAV m; exactly one of them is set in a feasible state.
  std::vector<std::size_t> group(std::size_t m) const;
};

/// N(x) = sum_v numerator[v] x_v,
/// D(x) = sum_v denominator_linear[v] x_v + sum_{v<w} pair[v,w] x_v x_w + noise.
///
/// Powers are expressed in units of the noise power, so noise == 1 and a
/// ratio of single-link terms is an SINR. The network objective has no
/// linear denominator terms; they exist for generic fractional problems.
struct FractionalObjective {
  AllocationVars vars;
  std::vector<double> numerator;
  std::vector<double> denominator_linear;
  std::map<std::pair<std::size_t, std::size_t>, double> denominator_pairs;
  double noise = 1.0;
  double unit_w = 1.0;  // watts per unit

  // Per-link pieces the aggregate maps are built from.
  Grid<double> rx;                      // M x N, |g|^2 / noise_w
  std::vector<double> power;            // L, watts
  std::vector<std::size_t> serving;     // N, serving UAV per GU

  double numerator_at(std::span<const std::uint8_t> x) const;
  double denominator_at(std::span<const std::uint8_t> x) const;
};

FractionalObjective fractional_objective(const Grid<double>& gains, const Grid<std::uint8_t>& association,
                                         const RadioParams& radio);
FractionalObjective fractional_objective(const Scenario& scenario, const ClusterAssignment& association);

/// -N(x) + sum_n w_n I_n(x) + lambda_p2 * sum_m (sum_{k,l} X[m,k,l] - 1)^2,
/// where I_n is the co-channel interference at GU n. `weights` has one entry
/// per GU.
QuboModel build_weighted_allocation_qubo(const FractionalObjective& obj, const std::vector<double>& weights,
                                         double lambda_p2);

/// Single scaling parameter: -N(x) + lambda_I (D(x) - noise) + penalty,
/// built from the numerator and denominator maps.
QuboModel build_allocation_qubo(const FractionalObjective& obj, double lambda_I, double lambda_p2);
QuboModel build_allocation_qubo(const Scenario& scenario, const ClusterAssignment& association, double lambda_I,
                                double lambda_p2);

enum class CapacityMode { Exactly, AtMost };

bool allocation_feasible(std::span<const std::uint8_t> bits, const AllocationVars& vars,
                         CapacityMode mode = CapacityMode::Exactly);

/// Heuristic: 1.05 * max_v (|numerator_v| + lambda_I * sum_w |pair_vw|), so
/// that any state with a violated group has an improving single flip.
/// Enumerated (M*K*L <= max_vars): lower = max over infeasible x of
/// (H* - cost(x)) / P(x) with P the group penalty, upper = cost range, chosen 5% into the gap.
PenaltyEstimate penalty_bound_allocation(const FractionalObjective& obj, double lambda_I, PenaltyMethod method,
                                         std::size_t max_vars = 20);
PenaltyEstimate penalty_bound_allocation(const Scenario& scenario, const ClusterAssignment& association,
                                         double lambda_I, PenaltyMethod method, std::size_t max_vars = 20);

struct DinkelbachStep {
  std::size_t iteration = 0;
  double q = 0.0;
  double lambda_p2 = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  double residual_F = 0.0;
  double best_energy = 0.0;  // best feasible QUBO energy of this iteration
  int escalations = 0;
};

struct AllocationPlan {
  std::vector<std::optional<std::size_t>> subchannel_of_uav;
  std::vector<std::optional<std::size_t>> power_level_of_uav;
  double lambda_I = 0.0;
  std::size_t dinkelbach_iters = 0;
  double residual_F = 0.0;
  bool converged = false;
  double lambda_p2 = 0.0;
  double numerator = 0.0;    // N(x*), noise units
  double denominator = 0.0;  // D(x*), noise units
  double sum_rate = 0.0;     // exact log rate, bits/s/Hz
  double solver_time_s = 0.0;
  Bits bits;
  std::vector<DinkelbachStep> trace;
};

/// Lowest-energy feasible sample. Throws NoFeasibleSample when there is none.
AllocationPlan decode_allocation(const SampleSet& set, const AllocationVars& vars,
                                 CapacityMode mode = CapacityMode::Exactly);

NetworkAssignment to_network_assignment(const ClusterAssignment& association, const AllocationPlan& plan,
                                        std::size_t K, std::size_t L);

/// Exact sum rate of the plan on the scenario.
double plan_sum_rate(const Scenario& scenario, const ClusterAssignment& association, const AllocationPlan& plan);

enum class ScalingMode { Aggregate, PerTerm };
std::string to_string(ScalingMode mode);
ScalingMode scaling_mode_from_string(const std::string& name);

struct PenaltyPolicy {
  /// Fixed lambda_p2 when > 0, otherwise the bound of `method` recomputed
  /// for every q.
  double fixed = 0.0;
  PenaltyMethod method = PenaltyMethod::HeuristicBound;
  int max_escalations = 3;
  double escalation_factor = 10.0;
};

struct DinkelbachOptions {
  double tol = 1e-6;
  std::size_t max_iter = 20;
  PenaltyPolicy penalty;
  ScalingMode mode = ScalingMode::Aggregate;
  CapacityMode capacity = CapacityMode::Exactly;
  /// Called with (iteration, attempt, model) before each sampler call.
  std::function<void(std::size_t, int, const QuboModel&)> on_qubo;
};

/// Aggregate mode: q_0 = 0, x_t = best feasible sample for lambda_I = q_t,
/// F = N(x_t) - q_t D(x_t), stop once F <= tol * max(1, N(x_t)), else
/// q_{t+1} = N(x_t) / D(x_t). The returned state is the best ratio seen.
///
/// Per-term mode: GU n gets its own weight q_n = S_n / (I_n + noise) from
/// the previous iterate; stops when the state repeats or the summed residual
/// meets the tolerance. The best sum of per-link ratios is returned.
AllocationPlan dinkelbach_solve(const Scenario& scenario, const ClusterAssignment& association,
                                const Sampler& sampler, const DinkelbachOptions& options = {},
                                std::uint64_t stream = 0);

/// The same iteration on any fractional objective; sum_rate is left at 0.
/// Per-term mode needs the per-link pieces of a network objective.
AllocationPlan dinkelbach_fractional(const FractionalObjective& obj, const Sampler& sampler,
                                     const DinkelbachOptions& options = {}, std::uint64_t stream = 0);

struct PerTermScaling {
  double lambda_num = 0.0;  // |g_mn|^2 P_m^l, watts
  double lambda_den = 0.0;  // summed co-channel |g_m'n|^2 P_m'^l', watts
  double T = 0.0;           // summed |g_mn|^2 P_m'^l' X X, watts
  double cost = 0.0;        // contribution to the cost, watts
};

/// Inner loops of the per-term scaling procedure evaluated at `x`, one
/// entry per (m, n, k, l) with s[m,n] = 1 and X[m,k,l] = 1.
std::map<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>, PerTermScaling> per_term_scaling(
    const Scenario& scenario, const ClusterAssignment& association, std::span<const std::uint8_t> x);

/// Columns: uav, subchannel, power_level, power_dbm.
void write_plan_csv(std::ostream& os, const AllocationPlan& plan, const RadioParams& radio);

}  // namespace uavqa
