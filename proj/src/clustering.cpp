#include "uavqa/clustering.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "uavqa/rng.hpp"

namespace uavqa {

std::vector<std::size_t> ClusterAssignment::serving_uavs() const {
  std::vector<std::size_t> out(association.cols(), SIZE_MAX);
  for (std::size_t m = 0; m < association.rows(); ++m)
    for (std::size_t n = 0; n < association.cols(); ++n)
      if (association(m, n)) out[n] = m;
  return out;
}

std::string to_string(PenaltyMethod method) {
  return method == PenaltyMethod::Enumerated ? "enumerated" : "heuristic-bound";
}

QuboModel build_clustering_qubo(const Grid<double>& distances, double lambda_p) {
  if (!(lambda_p > 0.0)) throw std::invalid_argument("lambda_p must be positive");
  const std::size_t M = distances.rows(), N = distances.cols();
  QuboModel cost(M * N);
  std::vector<std::vector<std::size_t>> groups(N);
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t n = 0; n < N; ++n) {
      const std::size_t v = clustering_var(m, n, N);
      cost.add_linear(v, distances(m, n));
      cost.set_label(v, "X[" + std::to_string(m) + "," + std::to_string(n) + "]");
      groups[n].push_back(v);
    }
  }
  return scale_and_add(cost, penalty_exactly_one(groups), lambda_p);
}

QuboModel build_clustering_qubo(const Scenario& scenario, double lambda_p) {
  return build_clustering_qubo(distance_matrix(scenario), lambda_p);
}

bool clustering_feasible(std::span<const std::uint8_t> bits, std::size_t M, std::size_t N) {
  if (bits.size() != M * N) return false;
  for (std::size_t n = 0; n < N; ++n) {
    int count = 0;
    for (std::size_t m = 0; m < M; ++m) count += bits[clustering_var(m, n, N)];
    if (count != 1) return false;
  }
  return true;
}

PenaltyEstimate penalty_bound_clustering(const Grid<double>& distances, PenaltyMethod method,
                                         std::size_t max_vars) {
  const std::size_t M = distances.rows(), N = distances.cols();
  PenaltyEstimate est;
  est.method = method;
  double total = 0.0, max_d = 0.0;
  for (double d : distances.data()) {
    total += d;
    max_d = std::max(max_d, d);
  }

  if (method == PenaltyMethod::HeuristicBound) {
    est.lower = max_d;
    est.upper = total;  // cost of the all-ones state
    est.chosen = max_d > 0.0 ? 1.05 * max_d : 1.0;
    return est;
  }

  const std::size_t nv = M * N;
  if (nv > max_vars)
    throw CapExceeded("enumerated penalty bound over " + std::to_string(nv) + " variables exceeds the cap of " +
                      std::to_string(max_vars));

  // Gray-code walk tracking cost, per-GU counts and the penalty sum.
  std::vector<std::uint8_t> x(nv, 0);
  std::vector<int> count(N, 0);
  double cost = 0.0;
  long long penalty = static_cast<long long>(N);
  const std::uint64_t total_states = std::uint64_t{1} << nv;

  // Pass 1: best feasible cost. Pass 2: bounds over the infeasible space.
  double best_feasible = std::numeric_limits<double>::infinity();
  auto walk = [&](auto&& visit) {
    std::fill(x.begin(), x.end(), 0);
    std::fill(count.begin(), count.end(), 0);
    cost = 0.0;
    penalty = static_cast<long long>(N);
    visit();
    for (std::uint64_t k = 1; k < total_states; ++k) {
      const std::size_t v = static_cast<std::size_t>(std::countr_zero(k));
      const std::size_t m = v / N, n = v % N;
      const long long before = (count[n] - 1) * (count[n] - 1);
      if (x[v]) {
        x[v] = 0;
        cost -= distances(m, n);
        --count[n];
      } else {
        x[v] = 1;
        cost += distances(m, n);
        ++count[n];
      }
      penalty += (count[n] - 1) * (count[n] - 1) - before;
      visit();
    }
  };
  walk([&] {
    if (penalty == 0) best_feasible = std::min(best_feasible, cost);
  });
  est.lower = -std::numeric_limits<double>::infinity();
  est.upper = -std::numeric_limits<double>::infinity();
  walk([&] {
    if (penalty == 0) return;
    est.lower = std::max(est.lower, (best_feasible - cost) / static_cast<double>(penalty));
    est.upper = std::max(est.upper, cost);
  });
  if (est.upper > est.lower) {
    est.chosen = est.lower + 0.05 * (est.upper - est.lower);
  } else {
    est.chosen = est.lower + 0.05 * std::max(std::abs(est.lower), 1.0);
  }
  if (!(est.chosen > 0.0)) est.chosen = std::numeric_limits<double>::min();
  return est;
}

PenaltyEstimate penalty_bound_clustering(const Scenario& scenario, PenaltyMethod method, std::size_t max_vars) {
  return penalty_bound_clustering(distance_matrix(scenario), method, max_vars);
}

double clustering_objective(const Grid<std::uint8_t>& association, const Grid<double>& distances) {
  // Summed GU by GU so equal assignments give bit-identical objectives.
  double total = 0.0;
  for (std::size_t n = 0; n < association.cols(); ++n)
    for (std::size_t m = 0; m < association.rows(); ++m)
      if (association(m, n)) total += distances(m, n);
  return total;
}

ClusterAssignment decode_clustering(std::span<const std::uint8_t> bits, const Grid<double>& distances,
                                    std::string source) {
  const std::size_t M = distances.rows(), N = distances.cols();
  if (!clustering_feasible(bits, M, N)) throw std::invalid_argument("clustering state is infeasible");
  ClusterAssignment out{Grid<std::uint8_t>(M, N), 0.0, std::move(source)};
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t n = 0; n < N; ++n) out.association(m, n) = bits[clustering_var(m, n, N)];
  out.objective = clustering_objective(out.association, distances);
  return out;
}

ClusterAssignment cluster(const Scenario& scenario, const Sampler& sampler, const ClusterOptions& options,
                          std::uint64_t stream) {
  const Grid<double> d = distance_matrix(scenario);
  const std::size_t M = d.rows(), N = d.cols();
  double lambda = options.lambda_p > 0.0 ? options.lambda_p
                                         : penalty_bound_clustering(d, PenaltyMethod::HeuristicBound).chosen;
  auto feasible = [M, N](std::span<const std::uint8_t> b) { return clustering_feasible(b, M, N); };

  double elapsed = 0.0;
  for (int attempt = 0; attempt <= options.max_escalations; ++attempt) {
    const QuboModel q = build_clustering_qubo(d, lambda);
    const SampleSet set = sampler.sample(q, derive_seed(stream, attempt));
    elapsed += set.wall_time_s;
    const SampleSet feasible_set = filter_feasible(set, feasible);
    if (!feasible_set.empty()) {
      ClusterAssignment out = decode_clustering(feasible_set.best().bits, d, sampler.name());
      out.solver_time_s = elapsed;
      return out;
    }
    lambda *= options.escalation_factor;
  }
  throw NoFeasibleSample("clustering: no feasible sample after " + std::to_string(options.max_escalations) +
                         " penalty escalations");
}

ClusterAssignment nearest_uav_assignment(const Scenario& scenario) {
  const Grid<double> d = distance_matrix(scenario);
  ClusterAssignment out{Grid<std::uint8_t>(d.rows(), d.cols()), 0.0, "nearest"};
  for (std::size_t n = 0; n < d.cols(); ++n) {
    std::size_t best = 0;
    for (std::size_t m = 1; m < d.rows(); ++m)
      if (d(m, n) < d(best, n)) best = m;
    out.association(best, n) = 1;
  }
  out.objective = clustering_objective(out.association, d);
  return out;
}

namespace {

double sq_dist(Point2 a, Point2 b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

}  // namespace

ClusterAssignment kmeanspp(const Scenario& scenario, std::size_t num_clusters, std::uint64_t seed,
                           std::size_t max_iters) {
  const auto& pts = scenario.gu_positions;
  const std::size_t N = pts.size(), M = scenario.num_uavs();
  if (num_clusters == 0 || num_clusters > N) throw std::invalid_argument("k-means++ needs 1 <= clusters <= GUs");
  if (num_clusters > M) throw std::invalid_argument("k-means++ needs at most one cluster per UAV");

  Rng rng(derive_seed(seed, 0));
  std::vector<Point2> centres;
  centres.push_back(pts[rng.below(N)]);
  std::vector<double> d2(N);
  while (centres.size() < num_clusters) {
    double total = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      d2[n] = INFINITY;
      for (const auto& c : centres) d2[n] = std::min(d2[n], sq_dist(pts[n], c));
      total += d2[n];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      for (pick = 0; pick + 1 < N; ++pick) {
        if (r < d2[pick]) break;
        r -= d2[pick];
      }
    } else {
      pick = rng.below(N);
    }
    centres.push_back(pts[pick]);
  }

  std::vector<std::size_t> label(N, SIZE_MAX);
  for (std::size_t it = 0; it < max_iters; ++it) {
    bool changed = false;
    for (std::size_t n = 0; n < N; ++n) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < centres.size(); ++c)
        if (sq_dist(pts[n], centres[c]) < sq_dist(pts[n], centres[best])) best = c;
      if (best != label[n]) {
        label[n] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Point2> sum(centres.size());
    std::vector<std::size_t> size(centres.size(), 0);
    for (std::size_t n = 0; n < N; ++n) {
      sum[label[n]].x += pts[n].x;
      sum[label[n]].y += pts[n].y;
      ++size[label[n]];
    }
    for (std::size_t c = 0; c < centres.size(); ++c)
      if (size[c] > 0) centres[c] = {sum[c].x / size[c], sum[c].y / size[c]};
  }

  // Greedy one-to-one matching of clusters to UAVs by centroid distance.
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t c = 0; c < centres.size(); ++c)
    for (std::size_t m = 0; m < M; ++m) pairs.emplace_back(sq_dist(centres[c], scenario.uav_positions[m]), c, m);
  std::sort(pairs.begin(), pairs.end());
  std::vector<std::size_t> uav_of(centres.size(), SIZE_MAX);
  std::vector<bool> taken(M, false);
  for (const auto& [dist, c, m] : pairs) {
    if (uav_of[c] != SIZE_MAX || taken[m]) continue;
    uav_of[c] = m;
    taken[m] = true;
  }

  const Grid<double> d = distance_matrix(scenario);
  ClusterAssignment out{Grid<std::uint8_t>(M, N), 0.0, "kmeanspp"};
  for (std::size_t n = 0; n < N; ++n) out.association(uav_of[label[n]], n) = 1;
  out.objective = clustering_objective(out.association, d);
  return out;
}

double poor_matching_fraction(const ClusterAssignment& assignment, const Scenario& scenario) {
  const Grid<double> d = distance_matrix(scenario);
  const auto serving = assignment.serving_uavs();
  std::size_t poor = 0;
  for (std::size_t n = 0; n < d.cols(); ++n) {
    double best = INFINITY;
    for (std::size_t m = 0; m < d.rows(); ++m) best = std::min(best, d(m, n));
    if (serving[n] == SIZE_MAX || d(serving[n], n) > best) ++poor;
  }
  return static_cast<double>(poor) / static_cast<double>(d.cols());
}

}  // namespace uavqa
