#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "uavqa/experiments.hpp"

using namespace uavqa;

namespace {

Sampler exhaustive() {
  SamplerSpec s;
  s.kind = SamplerKind::Exhaustive;
  return Sampler(s);
}

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.num_uavs = {2, 3};
  c.num_gus = {8};
  c.num_subchannels = {2};
  c.scenario.radio.power_levels_dbm = {20.0, 30.0};
  c.roster = {"sa", "sd"};
  c.seeds = {0, 1};
  c.params.sa_sweeps = 200;
  c.params.sa_restarts = 4;
  c.threads = 1;
  return c;
}

std::string strip_times(const std::vector<RunRecord>& recs) {
  auto copy = recs;
  for (auto& r : copy) r.cluster_time_s = r.alloc_time_s = r.wall_time_s = 0.0;
  std::ostringstream os;
  write_records_csv(os, copy);
  return os.str();
}

}  // namespace

TEST_CASE("single UAV pipeline matches the closed form") {
  ScenarioConfig c;
  c.num_uavs = 1;
  c.num_gus = 5;
  c.seed = 3;
  const auto sc = generate_scenario(c);
  const auto r = pipeline(sc, exhaustive(), exhaustive());
  const auto g = gain_matrix(sc).linear_gain;
  double expect = 0;
  for (std::size_t n = 0; n < 5; ++n) expect += std::log2(1 + g(0, n) * sc.radio.power_w(4) / sc.radio.noise_w());
  CHECK(r.sum_rate == doctest::Approx(expect).epsilon(1e-12));
  CHECK(r.clustering.objective == doctest::Approx(nearest_uav_assignment(sc).objective));
}

TEST_CASE("two-stage pipeline against brute force") {
  ScenarioConfig c;
  c.num_uavs = 3;
  c.num_gus = 6;
  c.radio.power_levels_dbm = {20.0, 30.0};
  c.seed = 17;
  const auto sc = generate_scenario(c);
  const auto r = pipeline(sc, exhaustive(), exhaustive());

  // stage 1: the nearest UAV assignment is the exact clustering optimum
  const auto near = nearest_uav_assignment(sc);
  CHECK(r.clustering.objective == doctest::Approx(near.objective));

  // stage 2: best N/D by counting over the 12 allocation variables
  const auto obj = fractional_objective(sc, r.clustering);
  double best = 0;
  for (std::uint64_t k = 0; k < 4096; ++k) {
    const auto x = oracle::bits_of(k, 12);
    if (allocation_feasible(x, obj.vars)) best = std::max(best, obj.numerator_at(x) / obj.denominator_at(x));
  }
  CHECK(r.plan.numerator / r.plan.denominator == doctest::Approx(best).epsilon(1e-9));
  CHECK(r.sum_rate == doctest::Approx(plan_sum_rate(sc, r.clustering, r.plan)));
}

TEST_CASE("K-means++ pipeline") {
  ScenarioConfig c;
  c.num_uavs = 3;
  c.num_gus = 12;
  c.radio.power_levels_dbm = {20.0, 30.0};
  c.seed = 2;
  const auto sc = generate_scenario(c);
  const auto r = pipeline_kmeanspp(sc, exhaustive());
  CHECK(r.clustering.source == "kmeanspp");
  CHECK(r.sum_rate > 0.0);
}

TEST_CASE("sweep points and seeds") {
  auto c = tiny_config();
  c.num_subchannels = {2, 3};
  const auto pts = sweep_points(c);
  REQUIRE(pts.size() == 4);
  CHECK(pts[0].num_subchannels == 2);
  CHECK(pts[0].num_uavs == 2);
  CHECK(pts[1].num_uavs == 3);
  CHECK(pts[2].num_subchannels == 3);
  CHECK(scenario_seed(1, 0) != solver_seed(1, 0));
  CHECK(scenario_seed(1, 0) != scenario_seed(1, 1));

  const auto a = scenario_for(c, pts[0], 0), b = scenario_for(c, pts[1], 0);
  CHECK(a.gu_positions == b.gu_positions);
  CHECK(a.num_uavs() == 2);
  CHECK(b.num_uavs() == 3);

  auto bad = c;
  bad.roster = {"nope"};
  CHECK_THROWS(bad.validate());
  bad = c;
  bad.seeds.clear();
  CHECK_THROWS(bad.validate());
}

TEST_CASE("sweep is deterministic") {
  const auto c = tiny_config();
  const auto r1 = sweep(c);
  auto c2 = c;
  c2.threads = 2;
  const auto r2 = sweep(c2);
  REQUIRE(r1.size() == 2 * 2 * 2);
  CHECK(strip_times(r1) == strip_times(r2));
  CHECK(r1[0].solver == "sa");
  CHECK(r1[1].solver == "sa");
  CHECK(r1[2].solver == "sd");
  for (const auto& r : r1) CHECK(r.status == "ok");

  const auto one = run_one(c, sweep_points(c)[1], "sd", 1);
  CHECK(one.sum_rate == r1[7].sum_rate);
  CHECK(one.cluster_objective == r1[7].cluster_objective);
}

TEST_CASE("aggregate") {
  std::vector<RunRecord> recs(4);
  for (std::size_t i = 0; i < 4; ++i) {
    recs[i].point = {2, 8, 2};
    recs[i].solver = "sa";
    recs[i].seed = i;
    recs[i].sum_rate = 1.0 + static_cast<double>(i);
    recs[i].wall_time_s = 2.0;
  }
  recs[3].status = "boom";
  const auto rows = aggregate(recs);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].runs == 4);
  CHECK(rows[0].failures == 1);
  CHECK(rows[0].sum_rate_mean == doctest::Approx(2.0));
  CHECK(rows[0].sum_rate_std == doctest::Approx(1.0));
  CHECK(rows[0].wall_time_s_std == doctest::Approx(0.0));

  std::ostringstream os;
  write_aggregate_csv(os, rows);
  CHECK(os.str().find("sum_rate_mean") != std::string::npos);
}

TEST_CASE("plot data") {
  std::ostringstream os;
  emit_plotdata(os, "sumrate_vs_uavs", {});
  CHECK(os.str() == "num_subchannels,num_gus,solver,num_uavs,runs,sum_rate_mean,sum_rate_std\n");
  CHECK_THROWS_AS(emit_plotdata(os, "bogus", {}), std::invalid_argument);

  SampleSet set;
  set.samples.push_back(Sample{Bits{1}, -1.0, 3, true});
  set.samples.push_back(Sample{Bits{0}, 0.0, 1, false});
  std::ostringstream h;
  emit_plotdata(h, "energy_histogram", {}, &set);
  const auto text = h.str();
  CHECK(text.rfind("series,energy,count\n", 0) == 0);
  CHECK(text.find("feasible,-1,3") != std::string::npos);
  CHECK(text.find("feasible,0") == std::string::npos);
}

TEST_CASE("clustering table") {
  auto c = tiny_config();
  c.num_uavs = {3};
  c.params.bench_sa_restarts = 2;
  const auto rows = report_clustering_table(c);
  REQUIRE(rows.size() == 4);
  double lo = 1e300;
  for (const auto& r : rows) {
    CHECK(r.normalized_objective >= 0.0);
    CHECK(r.normalized_objective <= 1.0);
    CHECK(r.poor_matching_pct >= 0.0);
    lo = std::min(lo, r.objective);
  }
  // exact row: 24 variables fit the exhaustive cap
  CHECK(rows[3].algorithm == "QA-QUBO");
  CHECK(rows[3].poor_matching_pct == 0.0);
  CHECK(rows[3].objective == doctest::Approx(lo));
}
