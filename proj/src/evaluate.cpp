#include "uavqa/evaluate.hpp"

#include <cmath>
#include <sstream>

#include "uavqa/format.hpp"

namespace uavqa {

NetworkAssignment NetworkAssignment::empty(std::size_t M, std::size_t N, std::size_t K, std::size_t L) {
  return {Grid<std::uint8_t>(M, N), Grid<std::uint8_t>(M, K), Grid<std::uint8_t>(M, L)};
}

NetworkAssignment NetworkAssignment::from_choices(
    std::size_t K, std::size_t L, const std::vector<std::size_t>& serving_uav,
    const std::vector<std::optional<std::size_t>>& channel_of_uav,
    const std::vector<std::optional<std::size_t>>& level_of_uav) {
  const std::size_t M = channel_of_uav.size();
  if (level_of_uav.size() != M) throw std::invalid_argument("channel and level lists differ in length");
  NetworkAssignment a = empty(M, serving_uav.size(), K, L);
  for (std::size_t n = 0; n < serving_uav.size(); ++n) a.association.at_checked(serving_uav[n], n) = 1;
  for (std::size_t m = 0; m < M; ++m) {
    if (channel_of_uav[m]) a.subchannel.at_checked(m, *channel_of_uav[m]) = 1;
    if (level_of_uav[m]) a.power.at_checked(m, *level_of_uav[m]) = 1;
  }
  return a;
}

std::vector<std::string> NetworkAssignment::violations() const {
  std::vector<std::string> out;
  const std::size_t M = num_uavs();
  if (subchannel.rows() != M || power.rows() != M) {
    out.emplace_back("assignment matrices disagree on the number of UAVs");
    return out;
  }
  auto binary = [&](const Grid<std::uint8_t>& g, const char* name) {
    for (auto v : g.data())
      if (v > 1) {
        out.push_back(std::string(name) + " has a non-binary entry");
        return;
      }
  };
  binary(association, "association");
  binary(subchannel, "subchannel");
  binary(power, "power");
  for (std::size_t n = 0; n < num_gus(); ++n) {
    int s = 0;
    for (std::size_t m = 0; m < M; ++m) s += association(m, n);
    if (s != 1) out.push_back("GU " + std::to_string(n) + " associated with " + std::to_string(s) + " UAVs");
  }
  for (std::size_t m = 0; m < M; ++m) {
    int k = 0, l = 0;
    for (auto v : subchannel.row(m)) k += v;
    for (auto v : power.row(m)) l += v;
    if (k > 1) out.push_back("UAV " + std::to_string(m) + " occupies " + std::to_string(k) + " sub-channels");
    if (l > 1) out.push_back("UAV " + std::to_string(m) + " has " + std::to_string(l) + " power levels");
  }
  return out;
}

namespace {

std::optional<std::size_t> first_set(std::span<const std::uint8_t> row) {
  for (std::size_t i = 0; i < row.size(); ++i)
    if (row[i]) return i;
  return std::nullopt;
}

}  // namespace

std::optional<std::size_t> NetworkAssignment::serving_uav(std::size_t gu) const {
  for (std::size_t m = 0; m < num_uavs(); ++m)
    if (association(m, gu)) return m;
  return std::nullopt;
}

std::optional<std::size_t> NetworkAssignment::channel_of(std::size_t uav) const {
  return first_set(subchannel.row(uav));
}

std::optional<std::size_t> NetworkAssignment::level_of(std::size_t uav) const {
  return first_set(power.row(uav));
}

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s = "infeasible assignment:";
  for (const auto& e : v) s += " " + e + ";";
  return s;
}

}  // namespace

ConstraintViolation::ConstraintViolation(std::vector<std::string> report)
    : std::runtime_error(join(report)), report_(std::move(report)) {}

double interference(const NetworkAssignment& a, const Grid<double>& gains, const RadioParams& radio,
                    std::size_t gu, std::size_t subchannel) {
  const auto serving = a.serving_uav(gu);
  double total = 0.0;
  for (std::size_t m = 0; m < a.num_uavs(); ++m) {
    if (serving && m == *serving) continue;
    if (!a.subchannel(m, subchannel)) continue;
    for (std::size_t l = 0; l < a.num_power_levels(); ++l)
      if (a.power(m, l)) total += gains(m, gu) * radio.power_w(l);
  }
  return total;
}

std::vector<LinkReport> link_reports(const NetworkAssignment& a, const Grid<double>& gains,
                                     const RadioParams& radio, double noise_w) {
  if (auto v = a.violations(); !v.empty()) throw ConstraintViolation(std::move(v));
  if (gains.rows() != a.num_uavs() || gains.cols() != a.num_gus())
    throw std::invalid_argument("gain matrix shape does not match the assignment");
  if (a.num_power_levels() != radio.num_power_levels())
    throw std::invalid_argument("power matrix width does not match the radio's power levels");

  std::vector<LinkReport> out;
  out.reserve(a.num_gus());
  for (std::size_t n = 0; n < a.num_gus(); ++n) {
    LinkReport r;
    r.gu = n;
    r.uav = a.serving_uav(n);
    const std::size_t m = *r.uav;
    r.subchannel = a.channel_of(m);
    const auto level = a.level_of(m);
    if (level) r.power_dbm = radio.power_levels_dbm[*level];
    if (r.subchannel && level) {
      r.signal_w = gains(m, n) * radio.power_w(*level);
      r.interference_w = interference(a, gains, radio, n, *r.subchannel);
      r.sinr = r.signal_w / (r.interference_w + noise_w);
      r.rate = std::log2(1.0 + r.sinr);
    }
    out.push_back(r);
  }
  return out;
}

double sum_rate(const NetworkAssignment& a, const Grid<double>& gains, const RadioParams& radio,
                double noise_w) {
  double total = 0.0;
  for (const auto& r : link_reports(a, gains, radio, noise_w)) total += r.rate;
  return total;
}

void write_link_csv(std::ostream& os, const std::vector<LinkReport>& links) {
  os << "gu,uav,subchannel,power_dbm,signal_w,interference_w,sinr_db,rate\n";
  for (const auto& r : links) {
    os << r.gu << ',' << (r.uav ? std::to_string(*r.uav) : "") << ','
       << (r.subchannel ? std::to_string(*r.subchannel) : "") << ','
       << (r.power_dbm ? fmt_double(*r.power_dbm) : "") << ',' << fmt_double(r.signal_w) << ','
       << fmt_double(r.interference_w) << ','
       << (r.sinr > 0.0 ? fmt_double(10.0 * std::log10(r.sinr)) : "") << ',' << fmt_double(r.rate)
       << '\n';
  }
}

}  // namespace uavqa
