#pragma once

// QUBO and Ising energy functions with an explicit constant offset.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace uavqa {

using Bits = std::vector<std::uint8_t>;

/// E(x) = sum_i Q_ii x_i + sum_{i<j} Q_ij x_i x_j + offset.
///
/// Terms are accumulated through the add_* calls; quadratic keys are stored
/// canonically with i < j and a diagonal quadratic term folds into the
/// linear one (x_i^2 = x_i). Once built, a model is used read-only.
class QuboModel {
 public:
  using Linear = std::map<std::size_t, double>;
  using Quadratic = std::map<std::pair<std::size_t, std::size_t>, double>;

  QuboModel() = default;
  explicit QuboModel(std::size_t num_vars) : num_vars_(num_vars), labels_(num_vars) {}

  std::size_t num_vars() const noexcept { return num_vars_; }
  const Linear& linear() const noexcept { return linear_; }
  const Quadratic& quadratic() const noexcept { return quadratic_; }
  double offset() const noexcept { return offset_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Grows the variable space so that index `i` is valid.
  void ensure_var(std::size_t i);
  void add_linear(std::size_t i, double coeff);
  void add_quadratic(std::size_t i, std::size_t j, double coeff);
  void add_offset(double c) { offset_ += c; }
  void set_label(std::size_t i, std::string label);

  /// Drops stored zero coefficients.
  void normalize();

  double linear_at(std::size_t i) const;
  double quadratic_at(std::size_t i, std::size_t j) const;
  std::size_t num_interactions() const noexcept { return quadratic_.size(); }

  /// Largest absolute linear or quadratic coefficient (0 for an empty model).
  double max_abs_coefficient() const;

  double energy(std::span<const std::uint8_t> x) const;

  bool operator==(const QuboModel&) const = default;

 private:
  std::size_t num_vars_ = 0;
  Linear linear_;
  Quadratic quadratic_;
  double offset_ = 0.0;
  std::vector<std::string> labels_;
};

/// H(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j + offset, s in {-1, +1}^n.
struct IsingModel {
  std::size_t num_vars = 0;
  std::map<std::size_t, double> h;
  std::map<std::pair<std::size_t, std::size_t>, double> j;
  double offset = 0.0;

  double energy(std::span<const std::int8_t> spins) const;
};

/// Exact conversion under s = 2x - 1: every state keeps its energy.
IsingModel to_ising(const QuboModel& model);

/// sum over groups of (sum_{v in G} x_v - 1)^2. Zero iff every group has
/// exactly one variable set.
QuboModel penalty_exactly_one(const std::vector<std::vector<std::size_t>>& groups);

/// target + weight * addend. Labels are merged; a variable labelled
/// differently in both models is an error.
QuboModel scale_and_add(const QuboModel& target, const QuboModel& addend, double weight);

class QuboFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coordinate text format:
///   c offset <value>
///   c label <i> <text>        (optional, one per labelled variable)
///   p qubo 0 <num_vars> <num_linear> <num_quadratic>
///   <i> <i> <value>           (linear, ascending i)
///   <i> <j> <value>           (quadratic, i < j, lexicographic)
void write_qubo(std::ostream& os, const QuboModel& model);
QuboModel read_qubo(std::istream& is);
void export_qubo_file(const QuboModel& model, const std::filesystem::path& path);
QuboModel import_qubo_file(const std::filesystem::path& path);

}  // namespace uavqa
