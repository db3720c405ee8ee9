#pragma once

// Samplers over QuboModel: exhaustive enumeration (ground-truth oracle),
// steepest descent and simulated annealing, behind one Sampler contract.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uavqa/qubo.hpp"

namespace uavqa {

struct Sample {
  Bits bits;
  double energy = 0.0;
  std::size_t multiplicity = 1;
  std::optional<bool> feasible;
};

/// Samples sorted ascending by energy, ties broken by lexicographic bits.
struct SampleSet {
  std::vector<Sample> samples;
  std::string solver_name;
  double wall_time_s = 0.0;
  std::map<std::string, std::string> params_echo;

  bool empty() const noexcept { return samples.empty(); }
  std::size_t size() const noexcept { return samples.size(); }
  const Sample& best() const;

  /// Merges duplicate bit vectors (summing multiplicity) and sorts.
  void canonicalize();
};

using FeasibilityPredicate = std::function<bool(std::span<const std::uint8_t>)>;

/// Sets the feasible flag of every sample.
void mark_feasibility(SampleSet& set, const FeasibilityPredicate& feasible);

/// Order-preserving subset of samples satisfying the predicate (flags set).
SampleSet filter_feasible(const SampleSet& set, const FeasibilityPredicate& feasible);

/// Columns: energy, feasible, bits_hex, multiplicity. Bit i of the state is
/// bit (i mod 4) of hex digit i / 4, digits written most significant first.
void write_sampleset_csv(std::ostream& os, const SampleSet& set);
std::string bits_to_hex(std::span<const std::uint8_t> bits);

struct ExhaustiveOptions {
  std::size_t max_vars = 24;
  /// Number of lowest-energy states kept; 0 keeps all 2^n.
  std::size_t keep_lowest = 1024;
};

class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

SampleSet solve_exhaustive(const QuboModel& model, const ExhaustiveOptions& options = {});

/// Flips the single bit with the largest energy decrease (lowest index on
/// ties) until no flip improves or `max_rounds` flips were made (0 = no
/// limit).
SampleSet solve_steepest_descent(const QuboModel& model, Bits start, std::size_t max_rounds = 0);
SampleSet solve_steepest_descent(const QuboModel& model, std::uint64_t seed, std::size_t max_rounds = 0);

/// Geometric inverse-temperature ladder from beta_initial to beta_final, one
/// rung per sweep. A zero beta selects the automatic value from
/// default_beta_range.
struct SaSchedule {
  std::size_t sweeps = 1000;
  std::size_t restarts = 20;
  double beta_initial = 0.0;
  double beta_final = 0.0;
  std::uint64_t seed = 0;
  /// Anneal each connected component of the interaction graph on its own and
  /// also report the combination of per-component best states.
  bool split_components = true;

  void validate() const;
};

/// Hot end: the largest possible single-flip change is accepted with
/// probability 1/2. Cold end: the smallest non-zero coefficient is accepted
/// with probability 1/100.
std::pair<double, double> default_beta_range(const QuboModel& model);

/// Metropolis single-flip sweeps in variable order. Restart r of component c
/// draws from derive_seed(derive_seed(seed, c), r) (c = 0 when the model is
/// annealed whole). Every restart contributes its final and best-seen state.
SampleSet solve_sa(const QuboModel& model, const SaSchedule& schedule);

enum class SamplerKind { Exhaustive, SteepestDescent, SimulatedAnnealing };

std::string to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(const std::string& name);

struct SamplerSpec {
  SamplerKind kind = SamplerKind::SimulatedAnnealing;
  SaSchedule sa;
  ExhaustiveOptions exhaustive;
  std::size_t sd_max_rounds = 0;
  std::uint64_t seed = 0;
  std::string name;  // optional display name, defaults to to_string(kind)
};

/// Stateless sampler. `stream` selects an independent random stream so that
/// repeated calls (e.g. one per outer iteration) stay reproducible.
class Sampler {
 public:
  explicit Sampler(SamplerSpec spec) : spec_(std::move(spec)) {}

  SampleSet sample(const QuboModel& model, std::uint64_t stream = 0) const;
  const SamplerSpec& spec() const noexcept { return spec_; }
  std::string name() const;

 private:
  SamplerSpec spec_;
};

}  // namespace uavqa
