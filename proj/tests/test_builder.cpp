#include <stdexcept>

#include "doctest.h"

#include "cflab/scheme.hpp"
#include "helpers.hpp"

using namespace cflab;
using namespace cflab::testutil;

namespace {

void expect_certified(const CFScheme& s, const BuildParams& p) {
  CHECK(check_base(s).passed());
  REQUIRE(p.folner_test_set.has_value());
  std::vector<Rational> eps = p.folner_eps;
  if (int(eps.size()) == s.depth()) eps.insert(eps.begin(), Rational(1));
  CHECK(check_folner_schedule(s, *p.folner_test_set, eps).passed());
  for (const auto& g : p.displacement_witnesses)
    for (int n = 0; n < s.depth(); ++n)
      CHECK(check_triangle(s, g, n, p.l_search_bound).has_value());
  for (const auto& g : p.stabilizer_witnesses) {
    const ConditionReport rep = check_square(s, g);
    CHECK(rep.passed());
  }
}

}  // namespace

TEST_CASE("builder precondition rejections") {
  const auto d = GroupDescriptor::integer_lattice(1);
  BuildParams p = BuildParams::defaults(d, 1);
  p.copy_sizes = {1};
  CHECK_THROWS_AS((void)build_scheme(d, 1, p), std::invalid_argument);

  BuildParams q = BuildParams::defaults(d, 2);
  CHECK_THROWS_AS((void)build_scheme(d, 1, q), std::invalid_argument);
  CHECK_THROWS_AS((void)build_scheme(d, 0, BuildParams::defaults(d, 1)),
                  std::invalid_argument);

  BuildParams r = BuildParams::defaults(d, 1);
  r.folner_eps = {make_rational(-1, 2)};
  CHECK_THROWS_AS((void)build_scheme(d, 1, r), std::invalid_argument);

  BuildParams s = BuildParams::defaults(d, 1);
  s.displacement_witnesses = {
      GroupDescriptor::discrete_heisenberg().identity()};
  CHECK_THROWS_AS((void)build_scheme(d, 1, s), KindMismatchError);
}

TEST_CASE("integers, depth 2, loose thresholds") {
  const auto d = GroupDescriptor::integer_lattice(1);
  BuildParams p = BuildParams::defaults(d, 2);
  p.copy_sizes = {2, 2};
  p.folner_eps = {make_rational(1, 4), make_rational(1, 20)};
  const CFScheme s = build_scheme(d, 2, p);

  CHECK(s.depth() == 2);
  expect_certified(s, p);
  // interval shapes: a single run per level
  CHECK(s.f_at(1).runs().size() == 1);
  CHECK(s.f_at(2).runs().size() == 1);
  // loose thresholds still demand 2/#F < eps
  CHECK(s.f_at(1).cardinality() >= 9);
  CHECK(s.f_at(2).cardinality() >= 41);

  // the checkers, not the builder, decide mixing: sizes (2,2) cannot pass
  const ConditionReport mix = check_mixing(s);
  CHECK(!mix.passed());
  for (const auto& it : mix.items)
    if (it.item != "copy-sizes-strictly-increasing") CHECK(it.pass);
}

TEST_CASE("builder is deterministic") {
  const auto d = GroupDescriptor::integer_lattice(2);
  const BuildParams p = BuildParams::defaults(d, 2);
  const CFScheme a = build_scheme(d, 2, p);
  const CFScheme b = build_scheme(d, 2, p);
  REQUIRE(a.depth() == b.depth());
  for (int n = 0; n <= a.depth(); ++n) CHECK(a.f_at(n) == b.f_at(n));
  for (int n = 1; n <= a.depth(); ++n) CHECK(a.c_at(n) == b.c_at(n));
}

TEST_CASE("default builds certify on every kind at small depth") {
  SUBCASE("integers") {
    const auto d = GroupDescriptor::integer_lattice(1);
    const BuildParams p = BuildParams::defaults(d, 3);
    const CFScheme s = build_scheme(d, 3, p);
    expect_certified(s, p);
    CHECK(check_mixing(s).passed());
  }
  SUBCASE("planar lattice") {
    const auto d = GroupDescriptor::integer_lattice(2);
    const BuildParams p = BuildParams::defaults(d, 2);
    const CFScheme s = build_scheme(d, 2, p);
    expect_certified(s, p);
    CHECK(check_mixing(s).passed());
  }
  SUBCASE("spatial lattice") {
    const auto d = GroupDescriptor::integer_lattice(3);
    const BuildParams p = BuildParams::defaults(d, 2);
    const CFScheme s = build_scheme(d, 2, p);
    expect_certified(s, p);
    CHECK(check_mixing(s).passed());
  }
  SUBCASE("heisenberg") {
    const auto d = GroupDescriptor::discrete_heisenberg();
    const BuildParams p = BuildParams::defaults(d, 2);
    const CFScheme s = build_scheme(d, 2, p);
    expect_certified(s, p);
    CHECK(check_mixing(s).passed());
  }
  SUBCASE("exponent-2 direct sum") {
    const auto d = GroupDescriptor::direct_sum_cyclic({2}, 16);
    const BuildParams p = BuildParams::defaults(d, 2);
    const CFScheme s = build_scheme(d, 2, p);
    expect_certified(s, p);
    CHECK(check_mixing(s).passed());
    // shapes are subgroup spans: one run starting at the identity
    for (int n = 1; n <= 2; ++n) {
      CHECK(s.f_at(n).runs().size() == 1);
      CHECK(s.f_at(n).contains(d.identity()));
      const ConditionReport sq = check_square(s, d.element({1}));
      CHECK(sq.passed());
    }
  }
  SUBCASE("mixed-order direct sum") {
    const auto d = GroupDescriptor::direct_sum_cyclic({2, 3}, 12);
    const BuildParams p = BuildParams::defaults(d, 2);
    const CFScheme s = build_scheme(d, 2, p);
    expect_certified(s, p);
    CHECK(check_mixing(s).passed());
  }
}

TEST_CASE("ball exhaustion by the top shape") {
  const auto d = GroupDescriptor::integer_lattice(1);
  const CFScheme s = build_scheme(d, 3, BuildParams::defaults(d, 3));
  const std::int64_t r = exhaustion_radius(s);
  CHECK(r >= 1);
  CHECK(ball(d, r).is_subset_of(s.f_at(3)));
  const CFScheme tiny = tiny_z_scheme();
  CHECK(exhaustion_radius(tiny) == 20);  // [-20..120] holds [-20..20]
}
