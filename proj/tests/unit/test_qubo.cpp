#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "uavqa/qubo.hpp"

using namespace uavqa;

TEST_CASE("energy") {
  QuboModel empty;
  empty.add_offset(2.5);
  CHECK(empty.energy(Bits{}) == 2.5);

  QuboModel one(1);
  one.add_linear(0, 1.0);
  one.add_offset(0.5);
  CHECK(one.energy(Bits{1}) == 1.5);
  CHECK(one.energy(Bits{0}) == 0.5);
  CHECK_THROWS(one.energy(Bits{1, 0}));

  Rng rng(1);
  const auto m = oracle::random_model(10, 0.5, rng);
  const oracle::Dense dense(m);
  for (std::uint64_t k = 0; k < 1024; k += 7) {
    const auto x = oracle::bits_of(k, 10);
    CHECK(m.energy(x) == doctest::Approx(dense.energy(x)).epsilon(1e-12));
  }
}

TEST_CASE("canonical storage") {
  QuboModel m(3);
  m.add_quadratic(2, 0, 1.5);
  m.add_quadratic(0, 2, 0.5);
  m.add_quadratic(1, 1, 3.0);  // x^2 = x
  CHECK(m.quadratic_at(0, 2) == 2.0);
  CHECK(m.quadratic().count({0, 2}) == 1);
  CHECK(m.linear_at(1) == 3.0);
  m.add_quadratic(0, 2, -2.0);
  m.normalize();
  CHECK(m.num_interactions() == 0);
}

TEST_CASE("to_ising") {
  QuboModel a(1);
  a.add_linear(0, 3.0);
  auto is = to_ising(a);
  CHECK(is.h.at(0) == 1.5);
  CHECK(is.offset == 1.5);
  CHECK(is.energy(std::vector<std::int8_t>{-1}) == 0.0);
  CHECK(is.energy(std::vector<std::int8_t>{1}) == 3.0);

  QuboModel b(2);
  b.add_quadratic(0, 1, 4.0);
  is = to_ising(b);
  CHECK(is.j.at({0, 1}) == 1.0);
  CHECK(is.h.at(0) == 1.0);
  CHECK(is.h.at(1) == 1.0);
  CHECK(is.offset == 1.0);
  for (std::uint64_t k = 0; k < 4; ++k) {
    const auto x = oracle::bits_of(k, 2);
    std::vector<std::int8_t> s{static_cast<std::int8_t>(2 * x[0] - 1), static_cast<std::int8_t>(2 * x[1] - 1)};
    CHECK(is.energy(s) == b.energy(x));
  }

  Rng rng(2);
  const auto m = oracle::random_model(12, 0.6, rng);
  is = to_ising(m);
  for (std::uint64_t k = 0; k < 4096; ++k) {
    const auto x = oracle::bits_of(k, 12);
    std::vector<std::int8_t> s(12);
    for (int i = 0; i < 12; ++i) s[i] = static_cast<std::int8_t>(2 * x[i] - 1);
    CHECK(std::abs(is.energy(s) - m.energy(x)) <= 1e-9);
  }
}

TEST_CASE("penalty_exactly_one") {
  const auto p = penalty_exactly_one({{0, 1}});
  CHECK(p.energy(Bits{1, 0}) == 0.0);
  CHECK(p.energy(Bits{1, 1}) == 1.0);
  CHECK(p.energy(Bits{0, 0}) == 1.0);
  CHECK(penalty_exactly_one({{0, 1, 2, 3, 4}}).energy(Bits(5, 1)) == 16.0);
  CHECK_THROWS(penalty_exactly_one({{}}));
  CHECK_THROWS(penalty_exactly_one({{1, 1}}));

  const auto two = penalty_exactly_one({{0, 1, 2}, {3, 4}});
  for (std::uint64_t k = 0; k < 32; ++k) {
    const auto x = oracle::bits_of(k, 5);
    const int a = x[0] + x[1] + x[2], b = x[3] + x[4];
    CHECK(two.energy(x) == (a - 1) * (a - 1) + (b - 1) * (b - 1));
  }
}

TEST_CASE("scale_and_add") {
  Rng rng(3);
  const auto a = oracle::random_model(8, 0.5, rng);
  const auto b = oracle::random_model(8, 0.5, rng);
  auto same = a;
  same.normalize();
  CHECK(scale_and_add(a, b, 0.0) == same);
  const auto doubled = scale_and_add(a, a, 1.0);
  for (const auto& [i, c] : a.linear()) CHECK(doubled.linear_at(i) == 2 * c);
  const auto sum = scale_and_add(a, b, 2.5);
  for (int t = 0; t < 100; ++t) {
    const auto x = oracle::bits_of(rng.below(256), 8);
    CHECK(sum.energy(x) == doctest::Approx(a.energy(x) + 2.5 * b.energy(x)).epsilon(1e-12));
  }
  QuboModel l1(1), l2(1);
  l1.set_label(0, "X[0,0]");
  l2.set_label(0, "X[0,1]");
  CHECK_THROWS(scale_and_add(l1, l2, 1.0));
}

TEST_CASE("qubo file round trip") {
  QuboModel empty;
  std::ostringstream e;
  write_qubo(e, empty);
  CHECK(e.str() == "c offset 0\np qubo 0 0 0 0\n");

  QuboModel f(3);
  f.add_linear(0, -1.0);
  f.add_linear(2, 0.25);
  f.add_quadratic(0, 1, 2.0);
  f.add_quadratic(1, 2, -0.1);
  f.add_offset(3.0);
  f.set_label(1, "X[0,1]");
  std::ostringstream a, b;
  write_qubo(a, f);
  write_qubo(b, f);
  CHECK(a.str() == b.str());
  CHECK(a.str() == "c offset 3\nc label 1 X[0,1]\np qubo 0 3 2 2\n0 0 -1\n2 2 0.25\n0 1 2\n1 2 -0.1\n");

  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    auto m = oracle::random_model(1 + rng.below(15), 0.4, rng);
    m.normalize();
    std::stringstream s1;
    write_qubo(s1, m);
    const auto back = read_qubo(s1);
    CHECK(back == m);
    std::ostringstream s2, s3;
    write_qubo(s2, back);
    write_qubo(s3, m);
    CHECK(s2.str() == s3.str());
  }

  auto parse = [](const std::string& text) {
    std::istringstream is(text);
    return read_qubo(is);
  };
  CHECK_THROWS_AS(parse("p qubo 0 2 1 0\n0 0 1\n0 0 2\n"), QuboFormatError);
  CHECK_THROWS_AS(parse("p qubo 0 2 2 0\n0 0 1\n"), QuboFormatError);
  CHECK_THROWS_AS(parse("p qubo 0 2 1 0\n5 5 1\n"), QuboFormatError);
  CHECK_THROWS_AS(parse("0 0 1\np qubo 0 2 1 0\n"), QuboFormatError);
  CHECK_THROWS_AS(parse("p qubo 0 2 x 0\n"), QuboFormatError);
}
