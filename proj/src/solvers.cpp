#include "uavqa/solvers.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <queue>

#include "compiled_qubo.hpp"
#include "uavqa/format.hpp"
#include "uavqa/rng.hpp"

namespace uavqa {

namespace detail {

CompiledQubo CompiledQubo::from_model(const QuboModel& model) {
  std::vector<std::size_t> all(model.num_vars());
  std::iota(all.begin(), all.end(), 0);
  return from_subset(model, all);
}

CompiledQubo CompiledQubo::from_subset(const QuboModel& model, const std::vector<std::size_t>& vars) {
  CompiledQubo q;
  q.n = vars.size();
  std::vector<std::size_t> local(model.num_vars(), SIZE_MAX);
  for (std::size_t k = 0; k < vars.size(); ++k) local[vars[k]] = k;

  q.linear.assign(q.n, 0.0);
  for (const auto& [i, c] : model.linear())
    if (local[i] != SIZE_MAX) q.linear[local[i]] = c;

  std::vector<std::size_t> degree(q.n, 0);
  for (const auto& [ij, c] : model.quadratic()) {
    const std::size_t a = local[ij.first], b = local[ij.second];
    if (a == SIZE_MAX || b == SIZE_MAX) continue;
    ++degree[a];
    ++degree[b];
  }
  q.row_start.assign(q.n + 1, 0);
  for (std::size_t i = 0; i < q.n; ++i) q.row_start[i + 1] = q.row_start[i] + degree[i];
  q.neighbor.resize(q.row_start.back());
  q.coupling.resize(q.row_start.back());
  std::vector<std::size_t> fill(q.row_start.begin(), q.row_start.end() - 1);
  for (const auto& [ij, c] : model.quadratic()) {
    const std::size_t a = local[ij.first], b = local[ij.second];
    if (a == SIZE_MAX || b == SIZE_MAX) continue;
    q.neighbor[fill[a]] = b;
    q.coupling[fill[a]++] = c;
    q.neighbor[fill[b]] = a;
    q.coupling[fill[b]++] = c;
  }
  return q;
}

FlipState::FlipState(const CompiledQubo& q, Bits x) : q_(&q), x_(std::move(x)), field_(q.linear) {
  for (std::size_t i = 0; i < q.n; ++i) {
    if (!x_[i]) continue;
    energy_ += q.linear[i];
    for (std::size_t e = q.row_start[i]; e < q.row_start[i + 1]; ++e) {
      field_[q.neighbor[e]] += q.coupling[e];
      if (q.neighbor[e] > i && x_[q.neighbor[e]]) energy_ += q.coupling[e];
    }
  }
}

void FlipState::flip(std::size_t i) {
  energy_ += delta(i);
  x_[i] ^= 1;
  const double sign = x_[i] ? 1.0 : -1.0;
  for (std::size_t e = q_->row_start[i]; e < q_->row_start[i + 1]; ++e)
    field_[q_->neighbor[e]] += sign * q_->coupling[e];
}

std::vector<std::vector<std::size_t>> connected_components(const QuboModel& model) {
  std::vector<std::size_t> parent(model.num_vars());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& [ij, c] : model.quadratic()) {
    if (c == 0.0) continue;
    const std::size_t a = find(ij.first), b = find(ij.second);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t v = 0; v < model.num_vars(); ++v) groups[find(v)].push_back(v);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(groups.size());
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  return out;
}

}  // namespace detail

using detail::CompiledQubo;
using detail::FlipState;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool sample_less(const Sample& a, const Sample& b) {
  if (a.energy != b.energy) return a.energy < b.energy;
  return a.bits < b.bits;
}

Bits random_bits(std::size_t n, Rng& rng) {
  Bits x(n);
  for (auto& b : x) b = rng.coin() ? 1 : 0;
  return x;
}

/// Energy-scale tolerance used to decide whether a flip "improves".
double improvement_tolerance(const QuboModel& model) {
  return 1e-12 * std::max(1.0, model.max_abs_coefficient());
}

}  // namespace

const Sample& SampleSet::best() const {
  if (samples.empty()) throw std::logic_error("empty sample set has no best sample");
  return samples.front();
}

void SampleSet::canonicalize() {
  std::sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) { return a.bits < b.bits; });
  std::vector<Sample> merged;
  merged.reserve(samples.size());
  for (auto& s : samples) {
    if (!merged.empty() && merged.back().bits == s.bits) {
      merged.back().multiplicity += s.multiplicity;
    } else {
      merged.push_back(std::move(s));
    }
  }
  std::stable_sort(merged.begin(), merged.end(), sample_less);
  samples = std::move(merged);
}

void mark_feasibility(SampleSet& set, const FeasibilityPredicate& feasible) {
  for (auto& s : set.samples) s.feasible = feasible(s.bits);
}

SampleSet filter_feasible(const SampleSet& set, const FeasibilityPredicate& feasible) {
  SampleSet out;
  out.solver_name = set.solver_name;
  out.wall_time_s = set.wall_time_s;
  out.params_echo = set.params_echo;
  for (const auto& s : set.samples) {
    if (!feasible(s.bits)) continue;
    out.samples.push_back(s);
    out.samples.back().feasible = true;
  }
  return out;
}

std::string bits_to_hex(std::span<const std::uint8_t> bits) {
  static constexpr char digits[] = "0123456789abcdef";
  const std::size_t ndig = std::max<std::size_t>(1, (bits.size() + 3) / 4);
  std::string out(ndig, '0');
  for (std::size_t d = 0; d < ndig; ++d) {
    unsigned v = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      const std::size_t i = 4 * d + b;
      if (i < bits.size() && bits[i]) v |= 1u << b;
    }
    out[ndig - 1 - d] = digits[v];
  }
  return out;
}

void write_sampleset_csv(std::ostream& os, const SampleSet& set) {
  os << "energy,feasible,bits_hex,multiplicity\n";
  for (const auto& s : set.samples) {
    os << fmt_double(s.energy) << ',' << (s.feasible ? (*s.feasible ? "1" : "0") : "") << ','
       << bits_to_hex(s.bits) << ',' << s.multiplicity << '\n';
  }
}

// ---------------------------------------------------------------- exhaustive

SampleSet solve_exhaustive(const QuboModel& model, const ExhaustiveOptions& options) {
  const auto t0 = Clock::now();
  const std::size_t n = model.num_vars();
  if (n > options.max_vars)
    throw CapExceeded("exhaustive search over " + std::to_string(n) + " variables exceeds the cap of " +
                      std::to_string(options.max_vars));
  if (n >= 63) throw CapExceeded("exhaustive search needs fewer than 63 variables");

  SampleSet out;
  out.solver_name = "exhaustive";
  out.params_echo = {{"max_vars", std::to_string(options.max_vars)},
                     {"keep_lowest", std::to_string(options.keep_lowest)}};

  const CompiledQubo q = CompiledQubo::from_model(model);
  FlipState state(q, Bits(n, 0));
  const std::uint64_t total = std::uint64_t{1} << n;
  const std::size_t keep = options.keep_lowest == 0 ? SIZE_MAX : options.keep_lowest;
  const double slack = 1e-7 * (1.0 + model.max_abs_coefficient()) * static_cast<double>(n + 1);

  // Max-heap on (energy, bits) holding the `keep` best states seen so far.
  auto worse = [](const Sample& a, const Sample& b) { return sample_less(a, b); };
  std::priority_queue<Sample, std::vector<Sample>, decltype(worse)> heap(worse);

  auto offer = [&]() {
    const double tracked = state.energy() + model.offset();
    if (heap.size() >= keep && tracked > heap.top().energy + slack) return;
    Sample s{state.bits(), model.energy(state.bits()), 1, std::nullopt};
    if (heap.size() < keep) {
      heap.push(std::move(s));
    } else if (sample_less(s, heap.top())) {
      heap.pop();
      heap.push(std::move(s));
    }
  };

  offer();
  for (std::uint64_t k = 1; k < total; ++k) {
    state.flip(static_cast<std::size_t>(std::countr_zero(k)));  // Gray-code successor
    offer();
  }
  out.samples.reserve(heap.size());
  while (!heap.empty()) {
    out.samples.push_back(heap.top());
    heap.pop();
  }
  std::reverse(out.samples.begin(), out.samples.end());
  out.wall_time_s = seconds_since(t0);
  return out;
}

// ------------------------------------------------------------ steepest descent

SampleSet solve_steepest_descent(const QuboModel& model, Bits start, std::size_t max_rounds) {
  const auto t0 = Clock::now();
  if (start.size() != model.num_vars()) throw std::invalid_argument("start state length mismatch");
  const CompiledQubo q = CompiledQubo::from_model(model);
  FlipState state(q, std::move(start));
  const double tol = improvement_tolerance(model);

  std::size_t rounds = 0;
  while (max_rounds == 0 || rounds < max_rounds) {
    std::size_t best = SIZE_MAX;
    double best_delta = -tol;
    for (std::size_t i = 0; i < q.n; ++i) {
      const double d = state.delta(i);
      if (d < best_delta) {
        best_delta = d;
        best = i;
      }
    }
    if (best == SIZE_MAX) break;
    state.flip(best);
    ++rounds;
  }

  SampleSet out;
  out.solver_name = "sd";
  out.params_echo = {{"max_rounds", std::to_string(max_rounds)}, {"rounds", std::to_string(rounds)}};
  out.samples.push_back({state.bits(), model.energy(state.bits()), 1, std::nullopt});
  out.wall_time_s = seconds_since(t0);
  return out;
}

SampleSet solve_steepest_descent(const QuboModel& model, std::uint64_t seed, std::size_t max_rounds) {
  Rng rng(derive_seed(seed, 0));
  auto out = solve_steepest_descent(model, random_bits(model.num_vars(), rng), max_rounds);
  out.params_echo["seed"] = std::to_string(seed);
  return out;
}

// ------------------------------------------------------- simulated annealing

void SaSchedule::validate() const {
  if (sweeps < 1) throw std::invalid_argument("SA needs at least one sweep");
  if (restarts < 1) throw std::invalid_argument("SA needs at least one restart");
  const bool auto_beta = beta_initial == 0.0 && beta_final == 0.0;
  if (!auto_beta && !(beta_final > beta_initial && beta_initial > 0.0))
    throw std::invalid_argument("SA schedule needs beta_final > beta_initial > 0");
}

std::pair<double, double> default_beta_range(const QuboModel& model) {
  std::vector<double> max_change(model.num_vars(), 0.0);
  double min_coeff = INFINITY;
  for (const auto& [i, c] : model.linear()) {
    max_change[i] += std::abs(c);
    if (c != 0.0) min_coeff = std::min(min_coeff, std::abs(c));
  }
  for (const auto& [ij, c] : model.quadratic()) {
    max_change[ij.first] += std::abs(c);
    max_change[ij.second] += std::abs(c);
    if (c != 0.0) min_coeff = std::min(min_coeff, std::abs(c));
  }
  const double max_delta = max_change.empty() ? 0.0 : *std::max_element(max_change.begin(), max_change.end());
  if (!(max_delta > 0.0) || !std::isfinite(min_coeff)) return {0.1, 1.0};
  const double hot = std::log(2.0) / max_delta;
  double cold = std::log(100.0) / min_coeff;
  if (cold <= hot) cold = 10.0 * hot;
  return {hot, cold};
}

namespace {

struct AnnealResult {
  Bits final_state;
  Bits best_state;
};

AnnealResult anneal_once(const CompiledQubo& q, const std::vector<double>& betas, std::uint64_t seed) {
  Rng rng(seed);
  FlipState state(q, random_bits(q.n, rng));
  Bits best = state.bits();
  double best_energy = state.energy();
  for (double beta : betas) {
    for (std::size_t i = 0; i < q.n; ++i) {
      const double d = state.delta(i);
      if (d > 0.0) {
        const double x = beta * d;
        if (x > 40.0 || rng.uniform() >= std::exp(-x)) continue;
      }
      state.flip(i);
      if (state.energy() < best_energy) {
        best_energy = state.energy();
        best = state.bits();
      }
    }
  }
  return {state.bits(), std::move(best)};
}

}  // namespace

SampleSet solve_sa(const QuboModel& model, const SaSchedule& schedule) {
  const auto t0 = Clock::now();
  schedule.validate();
  auto [beta0, beta1] = std::pair{schedule.beta_initial, schedule.beta_final};
  if (beta0 == 0.0 && beta1 == 0.0) std::tie(beta0, beta1) = default_beta_range(model);

  std::vector<double> betas(schedule.sweeps);
  for (std::size_t s = 0; s < schedule.sweeps; ++s) {
    const double t = schedule.sweeps == 1 ? 1.0 : static_cast<double>(s) / static_cast<double>(schedule.sweeps - 1);
    betas[s] = beta0 * std::pow(beta1 / beta0, t);
  }

  std::vector<std::vector<std::size_t>> components;
  if (schedule.split_components) components = detail::connected_components(model);
  if (components.size() <= 1) {
    components.assign(1, std::vector<std::size_t>(model.num_vars()));
    std::iota(components[0].begin(), components[0].end(), 0);
  }

  const std::size_t n = model.num_vars();
  const std::size_t R = schedule.restarts;
  std::vector<Bits> finals(R, Bits(n, 0)), bests(R, Bits(n, 0));
  Bits combined(n, 0);

  for (std::size_t c = 0; c < components.size(); ++c) {
    const auto& vars = components[c];
    const CompiledQubo q = CompiledQubo::from_subset(model, vars);
    const std::uint64_t comp_seed = derive_seed(schedule.seed, c);
    double comp_best_energy = INFINITY;
    for (std::size_t r = 0; r < R; ++r) {
      AnnealResult res = anneal_once(q, betas, derive_seed(comp_seed, r));
      for (std::size_t k = 0; k < vars.size(); ++k) {
        finals[r][vars[k]] = res.final_state[k];
        bests[r][vars[k]] = res.best_state[k];
      }
      const double e = FlipState(q, res.best_state).energy();
      if (e < comp_best_energy) {
        comp_best_energy = e;
        for (std::size_t k = 0; k < vars.size(); ++k) combined[vars[k]] = res.best_state[k];
      }
    }
  }

  SampleSet out;
  out.solver_name = "sa";
  out.params_echo = {{"sweeps", std::to_string(schedule.sweeps)},
                     {"restarts", std::to_string(R)},
                     {"beta_initial", fmt_double(beta0)},
                     {"beta_final", fmt_double(beta1)},
                     {"seed", std::to_string(schedule.seed)},
                     {"components", std::to_string(components.size())}};
  for (std::size_t r = 0; r < R; ++r) {
    out.samples.push_back({finals[r], model.energy(finals[r]), 1, std::nullopt});
    out.samples.push_back({bests[r], model.energy(bests[r]), 1, std::nullopt});
  }
  if (components.size() > 1) out.samples.push_back({combined, model.energy(combined), 1, std::nullopt});
  out.canonicalize();
  out.wall_time_s = seconds_since(t0);
  return out;
}

// ------------------------------------------------------------------- sampler

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::Exhaustive: return "exhaustive";
    case SamplerKind::SteepestDescent: return "sd";
    case SamplerKind::SimulatedAnnealing: return "sa";
  }
  return "unknown";
}

SamplerKind sampler_kind_from_string(const std::string& name) {
  if (name == "exhaustive") return SamplerKind::Exhaustive;
  if (name == "sd") return SamplerKind::SteepestDescent;
  if (name == "sa") return SamplerKind::SimulatedAnnealing;
  throw std::invalid_argument("unknown sampler '" + name + "'");
}

std::string Sampler::name() const { return spec_.name.empty() ? to_string(spec_.kind) : spec_.name; }

SampleSet Sampler::sample(const QuboModel& model, std::uint64_t stream) const {
  const std::uint64_t seed = derive_seed(spec_.seed, stream);
  SampleSet out;
  switch (spec_.kind) {
    case SamplerKind::Exhaustive:
      out = solve_exhaustive(model, spec_.exhaustive);
      break;
    case SamplerKind::SteepestDescent:
      out = solve_steepest_descent(model, seed, spec_.sd_max_rounds);
      break;
    case SamplerKind::SimulatedAnnealing: {
      SaSchedule s = spec_.sa;
      s.seed = seed;
      out = solve_sa(model, s);
      break;
    }
  }
  out.solver_name = name();
  return out;
}

}  // namespace uavqa
