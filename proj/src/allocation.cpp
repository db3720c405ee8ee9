#include "uavqa/allocation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>

#include "compiled_qubo.hpp"
#include "uavqa/format.hpp"
#include "uavqa/rng.hpp"

namespace uavqa {

std::string AllocationVars::label(std::size_t v) const {
  const auto [m, k, l] = decompose(v);
  return "X[" + std::to_string(m) + "," + std::to_string(k) + "," + std::to_string(l) + "]";
}

std::vector<std::size_t> AllocationVars::group(std::size_t m) const {
  std::vector<std::size_t> g;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < L; ++l) g.push_back(index(m, k, l));
  return g;
}

double FractionalObjective::numerator_at(std::span<const std::uint8_t> x) const {
  double total = 0.0;
  for (std::size_t v = 0; v < numerator.size(); ++v)
    if (x[v]) total += numerator[v];
  return total;
}

double FractionalObjective::denominator_at(std::span<const std::uint8_t> x) const {
  double total = 0.0;
  for (std::size_t v = 0; v < denominator_linear.size(); ++v)
    if (x[v]) total += denominator_linear[v];
  for (const auto& [key, c] : denominator_pairs)
    if (x[key.first] && x[key.second]) total += c;
  return total + noise;
}

FractionalObjective fractional_objective(const Grid<double>& gains, const Grid<std::uint8_t>& association,
                                         const RadioParams& radio) {
  radio.validate();
  const std::size_t M = gains.rows(), N = gains.cols();
  if (association.rows() != M || association.cols() != N)
    throw std::invalid_argument("association shape does not match the gain matrix");
  FractionalObjective obj;
  obj.vars = {M, static_cast<std::size_t>(radio.num_subchannels), radio.num_power_levels()};
  const std::size_t K = obj.vars.K, L = obj.vars.L;
  obj.unit_w = radio.noise_w();
  obj.rx = Grid<double>(M, N);
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t n = 0; n < N; ++n) obj.rx(m, n) = gains(m, n) / obj.unit_w;
  for (std::size_t l = 0; l < L; ++l) obj.power.push_back(radio.power_w(l));

  obj.serving.assign(N, SIZE_MAX);
  for (std::size_t n = 0; n < N; ++n) {
    int count = 0;
    for (std::size_t m = 0; m < M; ++m)
      if (association(m, n)) {
        obj.serving[n] = m;
        ++count;
      }
    if (count != 1) throw std::invalid_argument("GU " + std::to_string(n) + " must have exactly one UAV");
  }

  obj.numerator.assign(obj.vars.size(), 0.0);
  obj.denominator_linear.assign(obj.vars.size(), 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    const std::size_t m = obj.serving[n];
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t l = 0; l < L; ++l) obj.numerator[obj.vars.index(m, k, l)] += obj.rx(m, n) * obj.power[l];
  }
  for (std::size_t n = 0; n < N; ++n) {
    const std::size_t m = obj.serving[n];
    for (std::size_t mp = 0; mp < M; ++mp) {
      if (mp == m) continue;
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < L; ++l)
          for (std::size_t lp = 0; lp < L; ++lp) {
            std::size_t a = obj.vars.index(m, k, l), b = obj.vars.index(mp, k, lp);
            if (a > b) std::swap(a, b);
            obj.denominator_pairs[{a, b}] += obj.rx(mp, n) * obj.power[lp];
          }
    }
  }
  return obj;
}

FractionalObjective fractional_objective(const Scenario& scenario, const ClusterAssignment& association) {
  return fractional_objective(gain_matrix(scenario).linear_gain, association.association, scenario.radio);
}

namespace {

// -N(x) + sum_n w_n I_n(x), no penalty.
QuboModel weighted_cost(const FractionalObjective& obj, const std::vector<double>& weights) {
  const auto& vars = obj.vars;
  const std::size_t N = obj.serving.size();
  if (weights.size() != N) throw std::invalid_argument("one interference weight per GU is required");
  QuboModel q(vars.size());
  for (std::size_t v = 0; v < vars.size(); ++v) {
    q.set_label(v, vars.label(v));
    q.add_linear(v, -obj.numerator[v]);
  }
  for (std::size_t n = 0; n < N; ++n) {
    const double w = weights[n];
    if (w < 0.0 || !std::isfinite(w)) throw std::invalid_argument("interference weights must be finite and >= 0");
    if (w == 0.0) continue;
    const std::size_t m = obj.serving[n];
    for (std::size_t mp = 0; mp < vars.M; ++mp) {
      if (mp == m) continue;
      for (std::size_t k = 0; k < vars.K; ++k)
        for (std::size_t l = 0; l < vars.L; ++l)
          for (std::size_t lp = 0; lp < vars.L; ++lp)
            q.add_quadratic(vars.index(m, k, l), vars.index(mp, k, lp), w * obj.rx(mp, n) * obj.power[lp]);
    }
  }
  q.normalize();
  return q;
}

// -N(x) + q (D(x) - noise) from the coefficient maps.
QuboModel aggregate_cost(const FractionalObjective& obj, double q) {
  if (q < 0.0 || !std::isfinite(q)) throw std::invalid_argument("lambda_I must be finite and >= 0");
  QuboModel m(obj.vars.size());
  for (std::size_t v = 0; v < obj.vars.size(); ++v) {
    m.set_label(v, obj.vars.label(v));
    m.add_linear(v, -obj.numerator[v]);
    if (v < obj.denominator_linear.size()) m.add_linear(v, q * obj.denominator_linear[v]);
  }
  if (q != 0.0)
    for (const auto& [key, c] : obj.denominator_pairs) m.add_quadratic(key.first, key.second, q * c);
  m.normalize();
  return m;
}

std::vector<std::vector<std::size_t>> c9_groups(const AllocationVars& vars) {
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t m = 0; m < vars.M; ++m) groups.push_back(vars.group(m));
  return groups;
}

double heuristic_penalty(const QuboModel& cost) {
  std::vector<double> reach(cost.num_vars(), 0.0);
  for (const auto& [v, c] : cost.linear()) reach[v] += std::abs(c);
  for (const auto& [key, c] : cost.quadratic()) {
    reach[key.first] += std::abs(c);
    reach[key.second] += std::abs(c);
  }
  const double worst = reach.empty() ? 0.0 : *std::max_element(reach.begin(), reach.end());
  return worst > 0.0 ? 1.05 * worst : 1.0;
}

PenaltyEstimate enumerated_penalty(const QuboModel& cost, const AllocationVars& vars, std::size_t max_vars) {
  const std::size_t n = vars.size();
  if (n > max_vars)
    throw CapExceeded("enumerated penalty bound over " + std::to_string(n) + " variables exceeds the cap of " +
                      std::to_string(max_vars));
  const detail::CompiledQubo cq = detail::CompiledQubo::from_model(cost);
  const std::uint64_t total = std::uint64_t{1} << n;
  const std::size_t group_size = vars.K * vars.L;

  auto walk = [&](auto&& visit) {
    detail::FlipState state(cq, Bits(n, 0));
    std::vector<long long> count(vars.M, 0);
    long long pen = static_cast<long long>(vars.M);
    visit(state.energy(), pen);
    for (std::uint64_t k = 1; k < total; ++k) {
      const std::size_t v = static_cast<std::size_t>(std::countr_zero(k));
      const std::size_t m = v / group_size;
      const long long before = (count[m] - 1) * (count[m] - 1);
      count[m] += state.bits()[v] ? -1 : 1;
      state.flip(v);
      pen += (count[m] - 1) * (count[m] - 1) - before;
      visit(state.energy(), pen);
    }
  };

  double best_feasible = std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  walk([&](double e, long long pen) {
    lo = std::min(lo, e);
    hi = std::max(hi, e);
    if (pen == 0) best_feasible = std::min(best_feasible, e);
  });
  PenaltyEstimate est;
  est.method = PenaltyMethod::Enumerated;
  est.lower = -std::numeric_limits<double>::infinity();
  walk([&](double e, long long pen) {
    if (pen != 0) est.lower = std::max(est.lower, (best_feasible - e) / static_cast<double>(pen));
  });
  est.upper = hi - lo;
  if (est.upper > est.lower) {
    est.chosen = est.lower + 0.05 * (est.upper - est.lower);
  } else {
    est.chosen = est.lower + 0.05 * std::max(std::abs(est.lower), 1.0);
  }
  if (!(est.chosen > 0.0)) est.chosen = 1.0;
  return est;
}

PenaltyEstimate penalty_for_cost(const QuboModel& cost, const AllocationVars& vars, PenaltyMethod method,
                                 std::size_t max_vars) {
  if (method == PenaltyMethod::Enumerated) return enumerated_penalty(cost, vars, max_vars);
  PenaltyEstimate est;
  est.method = method;
  est.chosen = heuristic_penalty(cost);
  est.lower = est.chosen / 1.05;
  double range = 0.0;
  for (const auto& [v, c] : cost.linear()) range += std::abs(c);
  for (const auto& [key, c] : cost.quadratic()) range += std::abs(c);
  est.upper = range;
  return est;
}

}  // namespace

QuboModel build_weighted_allocation_qubo(const FractionalObjective& obj, const std::vector<double>& weights,
                                         double lambda_p2) {
  if (!(lambda_p2 > 0.0)) throw std::invalid_argument("lambda_p2 must be positive");
  return scale_and_add(weighted_cost(obj, weights), penalty_exactly_one(c9_groups(obj.vars)), lambda_p2);
}

QuboModel build_allocation_qubo(const FractionalObjective& obj, double lambda_I, double lambda_p2) {
  if (!(lambda_p2 > 0.0)) throw std::invalid_argument("lambda_p2 must be positive");
  return scale_and_add(aggregate_cost(obj, lambda_I), penalty_exactly_one(c9_groups(obj.vars)), lambda_p2);
}

QuboModel build_allocation_qubo(const Scenario& scenario, const ClusterAssignment& association, double lambda_I,
                                double lambda_p2) {
  return build_allocation_qubo(fractional_objective(scenario, association), lambda_I, lambda_p2);
}

bool allocation_feasible(std::span<const std::uint8_t> bits, const AllocationVars& vars, CapacityMode mode) {
  if (bits.size() != vars.size()) return false;
  for (std::size_t m = 0; m < vars.M; ++m) {
    int count = 0;
    for (std::size_t v : vars.group(m)) count += bits[v];
    if (count > 1 || (mode == CapacityMode::Exactly && count == 0)) return false;
  }
  return true;
}

PenaltyEstimate penalty_bound_allocation(const FractionalObjective& obj, double lambda_I, PenaltyMethod method,
                                         std::size_t max_vars) {
  return penalty_for_cost(aggregate_cost(obj, lambda_I), obj.vars, method, max_vars);
}

PenaltyEstimate penalty_bound_allocation(const Scenario& scenario, const ClusterAssignment& association,
                                         double lambda_I, PenaltyMethod method, std::size_t max_vars) {
  return penalty_bound_allocation(fractional_objective(scenario, association), lambda_I, method, max_vars);
}

AllocationPlan decode_allocation(const SampleSet& set, const AllocationVars& vars, CapacityMode mode) {
  const Sample* best = nullptr;
  for (const auto& s : set.samples) {
    if (!allocation_feasible(s.bits, vars, mode)) continue;
    if (!best || s.energy < best->energy || (s.energy == best->energy && s.bits < best->bits)) best = &s;
  }
  if (!best) throw NoFeasibleSample("allocation: no feasible sample in the sample set");
  AllocationPlan plan;
  plan.bits = best->bits;
  plan.subchannel_of_uav.assign(vars.M, std::nullopt);
  plan.power_level_of_uav.assign(vars.M, std::nullopt);
  for (std::size_t v = 0; v < vars.size(); ++v) {
    if (!best->bits[v]) continue;
    const auto [m, k, l] = vars.decompose(v);
    plan.subchannel_of_uav[m] = k;
    plan.power_level_of_uav[m] = l;
  }
  return plan;
}

NetworkAssignment to_network_assignment(const ClusterAssignment& association, const AllocationPlan& plan,
                                        std::size_t K, std::size_t L) {
  return NetworkAssignment::from_choices(K, L, association.serving_uavs(), plan.subchannel_of_uav,
                                         plan.power_level_of_uav);
}

double plan_sum_rate(const Scenario& scenario, const ClusterAssignment& association, const AllocationPlan& plan) {
  const auto a = to_network_assignment(association, plan, static_cast<std::size_t>(scenario.radio.num_subchannels),
                                       scenario.radio.num_power_levels());
  return sum_rate(a, gain_matrix(scenario).linear_gain, scenario.radio, scenario.radio.noise_w());
}

std::string to_string(ScalingMode mode) { return mode == ScalingMode::Aggregate ? "aggregate" : "per-term"; }

ScalingMode scaling_mode_from_string(const std::string& name) {
  if (name == "aggregate") return ScalingMode::Aggregate;
  if (name == "per-term") return ScalingMode::PerTerm;
  throw std::invalid_argument("unknown scaling mode '" + name + "'");
}

namespace {

struct LinkTerms {
  std::vector<double> signal;        // S_n, noise units
  std::vector<double> interference;  // I_n, noise units
};

LinkTerms link_terms(const FractionalObjective& obj, std::span<const std::uint8_t> x) {
  const auto& vars = obj.vars;
  std::vector<std::optional<std::pair<std::size_t, std::size_t>>> choice(vars.M);
  for (std::size_t v = 0; v < vars.size(); ++v)
    if (x[v]) {
      const auto [m, k, l] = vars.decompose(v);
      choice[m] = {k, l};
    }
  const std::size_t N = obj.serving.size();
  LinkTerms t{std::vector<double>(N, 0.0), std::vector<double>(N, 0.0)};
  for (std::size_t n = 0; n < N; ++n) {
    const std::size_t m = obj.serving[n];
    if (!choice[m]) continue;
    t.signal[n] = obj.rx(m, n) * obj.power[choice[m]->second];
    for (std::size_t mp = 0; mp < vars.M; ++mp)
      if (mp != m && choice[mp] && choice[mp]->first == choice[m]->first)
        t.interference[n] += obj.rx(mp, n) * obj.power[choice[mp]->second];
  }
  return t;
}

struct IterationResult {
  Sample best;
  double lambda_p2 = 0.0;
  int escalations = 0;
  double time_s = 0.0;
};

IterationResult sample_feasible(const FractionalObjective& obj, const QuboModel& cost, const Sampler& sampler,
                                const DinkelbachOptions& options, std::size_t iteration, std::uint64_t stream) {
  double lambda = options.penalty.fixed > 0.0 ? options.penalty.fixed
                                              : penalty_for_cost(cost, obj.vars, options.penalty.method, 20).chosen;
  const auto groups = penalty_exactly_one(c9_groups(obj.vars));
  IterationResult out;
  for (int attempt = 0; attempt <= options.penalty.max_escalations; ++attempt) {
    const QuboModel q = scale_and_add(cost, groups, lambda);
    if (options.on_qubo) options.on_qubo(iteration, attempt, q);
    const SampleSet set = sampler.sample(q, derive_seed(derive_seed(stream, iteration), attempt));
    out.time_s += set.wall_time_s;
    const Sample* best = nullptr;
    for (const auto& s : set.samples)
      if (allocation_feasible(s.bits, obj.vars, options.capacity) && (!best || s.energy < best->energy)) best = &s;
    if (best) {
      out.best = *best;
      out.lambda_p2 = lambda;
      out.escalations = attempt;
      return out;
    }
    lambda *= options.penalty.escalation_factor;
  }
  throw NoFeasibleSample("allocation: no feasible sample after " + std::to_string(options.penalty.max_escalations) +
                         " penalty escalations");
}

}  // namespace

AllocationPlan dinkelbach_fractional(const FractionalObjective& obj, const Sampler& sampler,
                                     const DinkelbachOptions& options, std::uint64_t stream) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (options.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  if (options.mode == ScalingMode::PerTerm && obj.serving.empty())
    throw std::invalid_argument("per-term scaling needs a network objective");
  const std::size_t N = obj.serving.size();

  std::vector<double> weights(N, 0.0);
  double q = 0.0;
  Bits best_bits, previous;
  double best_score = -std::numeric_limits<double>::infinity();
  AllocationPlan result;

  for (std::size_t it = 0; it < options.max_iter; ++it) {
    const QuboModel cost =
        options.mode == ScalingMode::Aggregate ? aggregate_cost(obj, q) : weighted_cost(obj, weights);
    const IterationResult r = sample_feasible(obj, cost, sampler, options, it, stream);
    result.solver_time_s += r.time_s;
    const Bits& x = r.best.bits;
    const double num = obj.numerator_at(x), den = obj.denominator_at(x);

    DinkelbachStep step;
    step.iteration = it;
    step.lambda_p2 = r.lambda_p2;
    step.numerator = num;
    step.denominator = den;
    step.best_energy = r.best.energy;
    step.escalations = r.escalations;

    double score = 0.0, residual = 0.0;
    bool done = false;
    if (options.mode == ScalingMode::Aggregate) {
      step.q = q;
      residual = num - q * den;
      score = num / den;
      done = residual <= options.tol * std::max(1.0, num);
      q = num / den;
      if (!std::isfinite(q)) throw std::runtime_error("allocation: non-finite scaling parameter");
    } else {
      const LinkTerms t = link_terms(obj, x);
      double total_signal = 0.0;
      step.q = N ? *std::max_element(weights.begin(), weights.end()) : 0.0;
      for (std::size_t n = 0; n < N; ++n) {
        const double d = t.interference[n] + obj.noise;
        residual += t.signal[n] - weights[n] * d;
        score += t.signal[n] / d;
        total_signal += t.signal[n];
        weights[n] = t.signal[n] / d;
      }
      done = std::abs(residual) <= options.tol * std::max(1.0, total_signal) || x == previous;
    }
    step.residual_F = residual;
    result.trace.push_back(step);
    previous = x;

    if (score > best_score) {
      best_score = score;
      best_bits = x;
    }
    if (done) {
      result.converged = true;
      break;
    }
  }

  SampleSet chosen;
  chosen.samples.push_back(Sample{best_bits, 0.0, 1, true});
  AllocationPlan plan = decode_allocation(chosen, obj.vars, options.capacity);
  plan.trace = std::move(result.trace);
  plan.converged = result.converged;
  plan.solver_time_s = result.solver_time_s;
  plan.dinkelbach_iters = plan.trace.size();
  plan.residual_F = plan.trace.back().residual_F;
  plan.lambda_p2 = plan.trace.back().lambda_p2;
  plan.numerator = obj.numerator_at(best_bits);
  plan.denominator = obj.denominator_at(best_bits);
  plan.lambda_I = options.mode == ScalingMode::Aggregate ? plan.trace.back().q : plan.numerator / plan.denominator;
  return plan;
}

AllocationPlan dinkelbach_solve(const Scenario& scenario, const ClusterAssignment& association,
                                const Sampler& sampler, const DinkelbachOptions& options, std::uint64_t stream) {
  AllocationPlan plan = dinkelbach_fractional(fractional_objective(scenario, association), sampler, options, stream);
  plan.sum_rate = plan_sum_rate(scenario, association, plan);
  return plan;
}

std::map<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>, PerTermScaling> per_term_scaling(
    const Scenario& scenario, const ClusterAssignment& association, std::span<const std::uint8_t> x) {
  const std::size_t M = scenario.num_uavs(), N = scenario.num_gus();
  const std::size_t K = static_cast<std::size_t>(scenario.radio.num_subchannels);
  const std::size_t L = scenario.radio.num_power_levels();
  const AllocationVars vars{M, K, L};
  if (x.size() != vars.size()) throw std::invalid_argument("state length does not match M*K*L");
  const Grid<double> g = gain_matrix(scenario).linear_gain;
  const auto& s = association.association;

  std::map<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>, PerTermScaling> out;
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t n = 0; n < N; ++n) {
      if (!s(m, n)) continue;
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < L; ++l) {
          if (!x[vars.index(m, k, l)]) continue;
          PerTermScaling t;
          t.lambda_num = g(m, n) * scenario.radio.power_w(l);
          for (std::size_t mp = 0; mp < M; ++mp) {
            if (mp == m) continue;
            for (std::size_t lp = 0; lp < L; ++lp) {
              if (!x[vars.index(mp, k, lp)]) continue;
              t.T += g(m, n) * scenario.radio.power_w(lp);
              t.lambda_den += g(mp, n) * scenario.radio.power_w(lp);
            }
          }
          t.cost = -t.lambda_num;
          if (t.lambda_den != 0.0) t.cost += t.T * t.lambda_num / t.lambda_den;
          out[{m, n, k, l}] = t;
        }
    }
  return out;
}

void write_plan_csv(std::ostream& os, const AllocationPlan& plan, const RadioParams& radio) {
  os << "uav,subchannel,power_level,power_dbm\n";
  for (std::size_t m = 0; m < plan.subchannel_of_uav.size(); ++m) {
    os << m << ',';
    if (plan.subchannel_of_uav[m]) os << *plan.subchannel_of_uav[m];
    os << ',';
    if (plan.power_level_of_uav[m]) os << *plan.power_level_of_uav[m];
    os << ',';
    if (plan.power_level_of_uav[m]) os << fmt_double(radio.power_levels_dbm[*plan.power_level_of_uav[m]]);
    os << '\n';
  }
}

}  // namespace uavqa
