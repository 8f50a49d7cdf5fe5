#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_helpers.hpp"

using namespace sysrisk;
using sysrisk::testing::coin;
using sysrisk::testing::random_space;
using Catch::Matchers::WithinAbs;

TEST_CASE("scenario space rejects bad probability vectors") {
  REQUIRE_THROWS_AS(ScenarioSpace::create({}), Error);
  REQUIRE_THROWS_AS(ScenarioSpace::create({0.5, 0.0, 0.5}), Error);
  REQUIRE_THROWS_AS(ScenarioSpace::create({0.5, -0.1, 0.6}), Error);
  REQUIRE_THROWS_AS(ScenarioSpace::create({0.5, 0.6}), Error);
  REQUIRE_NOTHROW(ScenarioSpace::create({1.0}));
}

TEST_CASE("random variable length must match its space") {
  auto space = coin();
  REQUIRE_THROWS_AS(RandomVariable(space, {1.0}), DimensionMismatch);
}

TEST_CASE("expectation examples") {
  auto space = coin();
  REQUIRE_THAT(expectation(RandomVariable(space, {2.0, 4.0})), WithinAbs(3.0, 1e-15));
  REQUIRE_THAT(expectation(RandomVariable::constant(space, 7.5)), WithinAbs(7.5, 1e-15));
  auto skew = ScenarioSpace::create({0.25, 0.75});
  REQUIRE_THAT(expectation(RandomVariable(skew, {0.0, 4.0})), WithinAbs(3.0, 1e-15));
}

TEST_CASE("pairing examples") {
  auto space = coin();
  const Density unit = Density::uniform(space);
  REQUIRE_THAT(pairing(RandomVariable(space, {1.0, 2.0}), unit), WithinAbs(1.5, 1e-15));
  REQUIRE_THAT(pairing(RandomVariable::constant(space, 0.0), unit), WithinAbs(0.0, 1e-15));
  const Density xi(RandomVariable(space, {0.5, 1.5}));
  REQUIRE_THAT(pairing(RandomVariable::constant(space, 2.0), xi), WithinAbs(2.0, 1e-15));
}

TEST_CASE("pairing raises on mismatched spaces") {
  RandomVariable x(coin(), {1.0, 2.0});
  RandomVariable y(ScenarioSpace::create({0.25, 0.75}), {1.0, 2.0});
  REQUIRE_THROWS_AS(pairing(x, y), MismatchedSpace);
}

TEST_CASE("pairing is linear in its first argument") {
  Rng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    auto space = random_space(rng, 1 + rng.uniform_int(1, 7));
    const std::size_t k = space->size();
    RandomVariable x(space, rng.uniform_vector(k, -2.0, 2.0));
    RandomVariable y(space, rng.uniform_vector(k, -2.0, 2.0));
    RandomVariable w(space, rng.uniform_vector(k, 0.0, 3.0));
    const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
    const double lhs = pairing(a * x + b * y, w);
    const double rhs = a * pairing(x, w) + b * pairing(y, w);
    REQUIRE_THAT(lhs, WithinAbs(rhs, 1e-12));
  }
}

TEST_CASE("relative entropy examples") {
  auto space = coin();
  REQUIRE_THAT(relative_entropy(Density::uniform(space)), WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(relative_entropy(Density(RandomVariable(space, {2.0, 0.0}))),
               WithinAbs(0.6931471805599453, 1e-14));
  REQUIRE_THAT(relative_entropy(Density(RandomVariable(space, {1.5, 0.5}))),
               WithinAbs(0.13081203594113697, 1e-14));
}

TEST_CASE("relative entropy is nonnegative, zero only at the base measure") {
  Rng rng(202);
  for (int trial = 0; trial < 200; ++trial) {
    auto space = random_space(rng, 1 + rng.uniform_int(1, 7));
    std::vector<double> w = rng.uniform_vector(space->size(), 0.01, 3.0);
    RandomVariable raw(space, w);
    const RandomVariable xi = (1.0 / expectation(raw)) * raw;
    const double h = relative_entropy(Density(xi));
    REQUIRE(h >= -1e-14);
    double max_dev = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k)
      max_dev = std::max(max_dev, std::abs(xi[k] - 1.0));
    if (h < 1e-10) REQUIRE(max_dev < 1e-4);
    if (max_dev > 0.1) REQUIRE(h > 1e-6);
  }
}

TEST_CASE("normalized exponential weights make a valid density") {
  Rng rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    auto space = random_space(rng, 1 + rng.uniform_int(1, 7));
    RandomVariable s(space, rng.uniform_vector(space->size(), -4.0, 4.0));
    const double theta = rng.uniform(0.05, 3.0);
    const Density xi = entropic_gradient(s, theta);
    REQUIRE_THAT(expectation(xi.rv()), WithinAbs(1.0, 1e-10));
  }
}

TEST_CASE("density constructor enforces its invariants") {
  auto space = coin();
  REQUIRE_THROWS_AS(Density(RandomVariable(space, {-0.1, 2.1})), Error);
  REQUIRE_THROWS_AS(Density(RandomVariable(space, {0.5, 0.5})), Error);
}

TEST_CASE("group sums: cancellation across one group is deterministic") {
  auto space = coin();
  const SystemLoss y = SystemLoss::from_matrix(space, {{1.0, -1.0}, {-1.0, 1.0}});
  const GroupSums one = group_sums(y, GroupStructure::single(2));
  REQUIRE(one.sums.size() == 1);
  REQUIRE_THAT(one.sums[0][0], WithinAbs(0.0, 1e-15));
  REQUIRE(one.deterministic[0]);

  const GroupSums two = group_sums(y, GroupStructure::singletons(2));
  REQUIRE(two.sums.size() == 2);
  REQUIRE_THAT(two.sums[0][0], WithinAbs(1.0, 1e-15));
  REQUIRE_THAT(two.sums[0][1], WithinAbs(-1.0, 1e-15));
  REQUIRE_FALSE(two.deterministic[0]);
  REQUIRE_FALSE(two.deterministic[1]);
}

TEST_CASE("group sums: constants stay deterministic under grouping") {
  auto space = coin();
  const SystemLoss y =
      SystemLoss::from_matrix(space, {{1.0, 1.0}, {2.0, 2.0}, {5.0, 5.0}});
  const GroupSums g = group_sums(y, GroupStructure({2, 3}));
  REQUIRE_THAT(g.sums[0][0], WithinAbs(3.0, 1e-15));
  REQUIRE_THAT(g.sums[1][0], WithinAbs(5.0, 1e-15));
  REQUIRE(g.deterministic[0]);
  REQUIRE(g.deterministic[1]);
}

TEST_CASE("group structure validation") {
  REQUIRE_THROWS_AS(GroupStructure({2, 2}), BadGroupStructure);
  REQUIRE_THROWS_AS(GroupStructure({0, 2}), BadGroupStructure);
  const SystemLoss y = SystemLoss::from_matrix(coin(), {{1.0, 1.0}, {2.0, 2.0}});
  REQUIRE_THROWS_AS(group_sums(y, GroupStructure({3})), BadGroupStructure);
}
