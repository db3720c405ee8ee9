#include "uavqa/qubo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "uavqa/format.hpp"

namespace uavqa {

void QuboModel::ensure_var(std::size_t i) {
  if (i >= num_vars_) {
    num_vars_ = i + 1;
    labels_.resize(num_vars_);
  }
}

void QuboModel::add_linear(std::size_t i, double coeff) {
  ensure_var(i);
  linear_[i] += coeff;
}

void QuboModel::add_quadratic(std::size_t i, std::size_t j, double coeff) {
  if (i == j) {
    add_linear(i, coeff);
    return;
  }
  if (i > j) std::swap(i, j);
  ensure_var(j);
  quadratic_[{i, j}] += coeff;
}

void QuboModel::set_label(std::size_t i, std::string label) {
  ensure_var(i);
  labels_[i] = std::move(label);
}

void QuboModel::normalize() {
  std::erase_if(linear_, [](const auto& kv) { return kv.second == 0.0; });
  std::erase_if(quadratic_, [](const auto& kv) { return kv.second == 0.0; });
}

double QuboModel::linear_at(std::size_t i) const {
  auto it = linear_.find(i);
  return it == linear_.end() ? 0.0 : it->second;
}

double QuboModel::quadratic_at(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  auto it = quadratic_.find({i, j});
  return it == quadratic_.end() ? 0.0 : it->second;
}

double QuboModel::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [i, c] : linear_) m = std::max(m, std::abs(c));
  for (const auto& [ij, c] : quadratic_) m = std::max(m, std::abs(c));
  return m;
}

double QuboModel::energy(std::span<const std::uint8_t> x) const {
  if (x.size() != num_vars_)
    throw std::invalid_argument("state length " + std::to_string(x.size()) + " does not match " +
                                std::to_string(num_vars_) + " variables");
  double e = offset_;
  for (const auto& [i, c] : linear_)
    if (x[i]) e += c;
  for (const auto& [ij, c] : quadratic_)
    if (x[ij.first] && x[ij.second]) e += c;
  return e;
}

double IsingModel::energy(std::span<const std::int8_t> spins) const {
  if (spins.size() != num_vars) throw std::invalid_argument("spin vector length mismatch");
  double e = offset;
  for (const auto& [i, c] : h) e += c * spins[i];
  for (const auto& [ij, c] : j) e += c * spins[ij.first] * spins[ij.second];
  return e;
}

// x_i = (s_i + 1) / 2:
//   Q_ii x_i       = Q_ii/2 s_i + Q_ii/2
//   Q_ij x_i x_j   = Q_ij/4 (s_i s_j + s_i + s_j + 1)
// With upper-triangular storage each pair feeds Q_ij/4 into both fields.
IsingModel to_ising(const QuboModel& model) {
  IsingModel ising;
  ising.num_vars = model.num_vars();
  ising.offset = model.offset();
  for (const auto& [i, c] : model.linear()) {
    ising.h[i] += c / 2.0;
    ising.offset += c / 2.0;
  }
  for (const auto& [ij, c] : model.quadratic()) {
    ising.j[ij] += c / 4.0;
    ising.h[ij.first] += c / 4.0;
    ising.h[ij.second] += c / 4.0;
    ising.offset += c / 4.0;
  }
  std::erase_if(ising.h, [](const auto& kv) { return kv.second == 0.0; });
  return ising;
}

QuboModel penalty_exactly_one(const std::vector<std::vector<std::size_t>>& groups) {
  QuboModel q;
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("exactly-one group must not be empty");
    std::set<std::size_t> seen(g.begin(), g.end());
    if (seen.size() != g.size()) throw std::invalid_argument("exactly-one group repeats a variable");
    for (std::size_t a = 0; a < g.size(); ++a) {
      q.add_linear(g[a], -1.0);
      for (std::size_t b = a + 1; b < g.size(); ++b) q.add_quadratic(g[a], g[b], 2.0);
    }
    q.add_offset(1.0);
  }
  return q;
}

QuboModel scale_and_add(const QuboModel& target, const QuboModel& addend, double weight) {
  QuboModel out = target;
  if (addend.num_vars() > 0) out.ensure_var(addend.num_vars() - 1);
  for (std::size_t i = 0; i < addend.num_vars(); ++i) {
    const std::string& theirs = addend.labels()[i];
    if (theirs.empty()) continue;
    const std::string& ours = out.labels()[i];
    if (!ours.empty() && ours != theirs)
      throw std::invalid_argument("variable " + std::to_string(i) + " labelled '" + ours + "' and '" + theirs + "'");
    out.set_label(i, theirs);
  }
  if (weight != 0.0) {
    for (const auto& [i, c] : addend.linear()) out.add_linear(i, weight * c);
    for (const auto& [ij, c] : addend.quadratic()) out.add_quadratic(ij.first, ij.second, weight * c);
    out.add_offset(weight * addend.offset());
  }
  out.normalize();
  return out;
}

void write_qubo(std::ostream& os, const QuboModel& model) {
  os << "c offset " << fmt_double(model.offset()) << '\n';
  for (std::size_t i = 0; i < model.labels().size(); ++i)
    if (!model.labels()[i].empty()) os << "c label " << i << ' ' << model.labels()[i] << '\n';
  os << "p qubo 0 " << model.num_vars() << ' ' << model.linear().size() << ' ' << model.quadratic().size()
     << '\n';
  for (const auto& [i, c] : model.linear()) os << i << ' ' << i << ' ' << fmt_double(c) << '\n';
  for (const auto& [ij, c] : model.quadratic())
    os << ij.first << ' ' << ij.second << ' ' << fmt_double(c) << '\n';
}

namespace {

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw QuboFormatError("line " + std::to_string(line_no) + ": " + why);
}

}  // namespace

QuboModel read_qubo(std::istream& is) {
  QuboModel model;
  bool have_header = false;
  std::size_t num_vars = 0, want_linear = 0, want_quadratic = 0;
  std::size_t got_linear = 0, got_quadratic = 0;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<std::pair<std::size_t, std::string>> labels;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == 'c') {
      std::string tag, key;
      ls >> tag >> key;
      if (key == "offset") {
        double v;
        if (!(ls >> v)) malformed(line_no, "bad offset comment");
        model.add_offset(v);
      } else if (key == "label") {
        std::size_t i;
        if (!(ls >> i)) malformed(line_no, "bad label comment");
        std::string text;
        std::getline(ls >> std::ws, text);
        labels.emplace_back(i, text);
      }
      continue;
    }
    if (line[0] == 'p') {
      if (have_header) malformed(line_no, "duplicate header");
      std::string p, kind;
      std::size_t topology;
      if (!(ls >> p >> kind >> topology >> num_vars >> want_linear >> want_quadratic) || kind != "qubo")
        malformed(line_no, "bad header, expected 'p qubo 0 <maxnode> <nlinear> <nquadratic>'");
      have_header = true;
      if (num_vars > 0) model.ensure_var(num_vars - 1);
      continue;
    }
    if (!have_header) malformed(line_no, "entry before header");
    std::size_t i, j;
    double v;
    std::string rest;
    if (!(ls >> i >> j >> v) || (ls >> rest)) malformed(line_no, "expected '<i> <j> <value>'");
    if (i >= num_vars || j >= num_vars) malformed(line_no, "variable index out of range");
    if (i > j) std::swap(i, j);
    if (!seen.insert({i, j}).second) malformed(line_no, "duplicate entry");
    if (i == j) {
      model.add_linear(i, v);
      ++got_linear;
    } else {
      model.add_quadratic(i, j, v);
      ++got_quadratic;
    }
  }
  if (!have_header) throw QuboFormatError("missing 'p qubo' header");
  if (got_linear != want_linear || got_quadratic != want_quadratic)
    throw QuboFormatError("entry counts do not match the header");
  for (auto& [i, text] : labels) {
    if (i >= num_vars) throw QuboFormatError("label for unknown variable " + std::to_string(i));
    model.set_label(i, std::move(text));
  }
  return model;
}

void export_qubo_file(const QuboModel& model, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_qubo(os, model);
}

QuboModel import_qubo_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_qubo(is);
}

}  // namespace uavqa
