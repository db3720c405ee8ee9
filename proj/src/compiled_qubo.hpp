#pragma once

// Internal adjacency form of a QuboModel used by the local-search solvers.

#include <cstdint>
#include <vector>

#include "uavqa/qubo.hpp"

namespace uavqa::detail {

struct CompiledQubo {
  std::size_t n = 0;
  std::vector<double> linear;
  std::vector<std::size_t> row_start;  // size n + 1
  std::vector<std::size_t> neighbor;
  std::vector<double> coupling;

  static CompiledQubo from_model(const QuboModel& model);
  /// Restriction of `model` to `vars` (local index = position in vars).
  static CompiledQubo from_subset(const QuboModel& model, const std::vector<std::size_t>& vars);
};

/// Local fields f_i = Q_ii + sum_j Q_ij x_j, flip cost (1 - 2 x_i) f_i and
/// running energy (without the model offset).
class FlipState {
 public:
  FlipState(const CompiledQubo& q, Bits x);

  double delta(std::size_t i) const { return x_[i] ? -field_[i] : field_[i]; }
  void flip(std::size_t i);

  const Bits& bits() const noexcept { return x_; }
  double energy() const noexcept { return energy_; }

 private:
  const CompiledQubo* q_;
  Bits x_;
  std::vector<double> field_;
  double energy_ = 0.0;
};

/// Connected components of the interaction graph, each sorted ascending,
/// ordered by smallest member.
std::vector<std::vector<std::size_t>> connected_components(const QuboModel& model);

}  // namespace uavqa::detail
