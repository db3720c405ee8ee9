#include "doctest.h"
#include "oracles.hpp"
#include "uavqa/clustering.hpp"

using namespace uavqa;

namespace {

Grid<double> grid(std::size_t M, std::size_t N, std::initializer_list<double> v) {
  Grid<double> g(M, N);
  auto it = v.begin();
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t n = 0; n < N; ++n) g(m, n) = *it++;
  return g;
}

Scenario small_scenario(std::size_t M, std::size_t N, std::uint64_t seed) {
  ScenarioConfig c;
  c.num_uavs = static_cast<int>(M);
  c.num_gus = static_cast<int>(N);
  c.seed = seed;
  return generate_scenario(c);
}

Sampler exhaustive() {
  SamplerSpec s;
  s.kind = SamplerKind::Exhaustive;
  return Sampler(s);
}

}  // namespace

TEST_CASE("clustering qubo") {
  const auto d1 = grid(1, 3, {5, 7, 9});
  const auto q1 = build_clustering_qubo(d1, 50);
  CHECK(solve_exhaustive(q1).best().energy == doctest::Approx(21));
  CHECK(solve_exhaustive(q1).best().bits == Bits{1, 1, 1});

  const auto d = grid(2, 1, {10, 20});
  const auto q = build_clustering_qubo(d, 100);
  CHECK(q.labels()[clustering_var(1, 0, 1)] == "X[1,0]");
  const auto best = solve_exhaustive(q).best();
  CHECK(best.bits == Bits{1, 0});
  CHECK(best.energy == doctest::Approx(10));
  CHECK_THROWS(build_clustering_qubo(d, 0.0));

  // penalty vanishes on every feasible state
  Rng rng(21);
  Grid<double> r(3, 4);
  for (std::size_t m = 0; m < 3; ++m)
    for (std::size_t n = 0; n < 4; ++n) r(m, n) = rng.uniform(100, 900);
  const auto qr = build_clustering_qubo(r, 1000);
  for (std::uint64_t k = 0; k < 4096; ++k) {
    const auto x = oracle::bits_of(k, 12);
    if (!clustering_feasible(x, 3, 4)) continue;
    double cost = 0;
    for (std::size_t v = 0; v < 12; ++v) cost += x[v] * r(v / 4, v % 4);
    CHECK(qr.energy(x) == doctest::Approx(cost).epsilon(1e-12));
  }
}

TEST_CASE("clustering penalty bounds") {
  const auto d = grid(2, 2, {120, 480, 600, 210});
  const auto h = penalty_bound_clustering(d, PenaltyMethod::HeuristicBound);
  CHECK(h.chosen >= 600);

  const auto e = penalty_bound_clustering(d, PenaltyMethod::Enumerated);
  CHECK(e.lower <= e.chosen);
  CHECK(e.chosen <= e.upper);
  auto ground = [&](double lambda) { return solve_exhaustive(build_clustering_qubo(d, lambda)).best().bits; };
  CHECK(clustering_feasible(ground(e.chosen), 2, 2));
  CHECK_FALSE(clustering_feasible(ground(e.chosen / 100), 2, 2));
  CHECK_THROWS_AS(penalty_bound_clustering(Grid<double>(3, 7, 1.0), PenaltyMethod::Enumerated), CapExceeded);

  // equal distances: the threshold is exactly d
  const auto eq = grid(2, 2, {300, 300, 300, 300});
  const auto be = penalty_bound_clustering(eq, PenaltyMethod::Enumerated);
  CHECK(be.lower == doctest::Approx(300));
  CHECK(clustering_feasible(solve_exhaustive(build_clustering_qubo(eq, be.chosen)).best().bits, 2, 2));
  CHECK_FALSE(clustering_feasible(solve_exhaustive(build_clustering_qubo(eq, 150)).best().bits, 2, 2));
}

TEST_CASE("cluster matches nearest-UAV oracle on small instances") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const auto s = small_scenario(2 + seed % 3, 4, seed);
    if (s.num_uavs() * s.num_gus() > 16) continue;
    const auto lambda = penalty_bound_clustering(s, PenaltyMethod::Enumerated).chosen;
    ClusterOptions o;
    o.lambda_p = lambda;
    const auto a = cluster(s, exhaustive(), o);
    CHECK(a.objective == doctest::Approx(nearest_uav_assignment(s).objective).epsilon(1e-12));
    CHECK(poor_matching_fraction(a, s) == 0.0);
    CHECK(a.objective <= kmeanspp(s, s.num_uavs(), seed).objective + 1e-9);
  }
}

TEST_CASE("cluster well-separated and ties") {
  Scenario s;
  s.uav_positions = {{500, 500}, {2000, 2000}};
  s.gu_positions = {{520, 480}, {1990, 2100}, {450, 560}, {2050, 1900}};
  SamplerSpec sa;
  sa.sa.sweeps = 200;
  sa.sa.restarts = 5;
  const auto a = cluster(s, Sampler(sa));
  CHECK(a.serving_uavs() == std::vector<std::size_t>{0, 1, 0, 1});

  s.gu_positions = {{1250, 1250}};
  const auto t = cluster(s, exhaustive());
  CHECK(t.objective == doctest::Approx(distance(s.uav_positions[0], {1250, 1250}, s.radio.altitude_m)));
  CHECK(poor_matching_fraction(t, s) == 0.0);
}

TEST_CASE("cluster penalty escalation") {
  SamplerSpec ground;
  ground.kind = SamplerKind::Exhaustive;
  ground.exhaustive.keep_lowest = 1;
  const auto s = small_scenario(2, 3, 4);
  ClusterOptions o;
  o.lambda_p = 1e-3;  // ground state is all-zero
  o.escalation_factor = 1e6;
  const auto a = cluster(s, Sampler(ground), o);
  CHECK(a.objective == doctest::Approx(nearest_uav_assignment(s).objective));
  o.max_escalations = 0;
  CHECK_THROWS_AS(cluster(s, Sampler(ground), o), NoFeasibleSample);
}

TEST_CASE("kmeanspp") {
  Scenario s;
  s.uav_positions = {{300, 300}, {1800, 400}, {900, 2000}};
  s.gu_positions = {{1800, 400}, {900, 2000}, {300, 300}};
  const auto a = kmeanspp(s, 3, 9);
  CHECK(poor_matching_fraction(a, s) == 0.0);
  CHECK(a.objective == doctest::Approx(3 * s.radio.altitude_m));

  const auto big = small_scenario(7, 100, 3);
  const auto k1 = kmeanspp(big, 7, 5), k2 = kmeanspp(big, 7, 5);
  CHECK(k1.association == k2.association);
  for (std::size_t n = 0; n < 100; ++n) {
    int c = 0;
    for (std::size_t m = 0; m < 7; ++m) c += k1.association(m, n);
    CHECK(c == 1);
  }
  CHECK_THROWS(kmeanspp(big, 8, 1));
}

TEST_CASE("poor matching") {
  const auto s = small_scenario(3, 10, 8);
  auto a = nearest_uav_assignment(s);
  CHECK(poor_matching_fraction(a, s) == 0.0);
  const auto serve = a.serving_uavs();
  std::size_t i = 0, j = 1;
  while (serve[j] == serve[i]) ++j;
  a.association(serve[i], i) = 0;
  a.association(serve[j], i) = 1;
  a.association(serve[j], j) = 0;
  a.association(serve[i], j) = 1;
  CHECK(poor_matching_fraction(a, s) == doctest::Approx(0.2));
}

TEST_CASE("decode_clustering") {
  const auto d = grid(2, 2, {1, 2, 3, 4});
  const auto a = decode_clustering(Bits{1, 0, 0, 1}, d, "x");
  CHECK(a.objective == 5);
  CHECK_THROWS(decode_clustering(Bits{1, 1, 0, 1}, d, "x"));
}
