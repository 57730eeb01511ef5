#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "cflab/cfspace.hpp"
#include "cflab/errors.hpp"
#include "helpers.hpp"

using namespace cflab;
using namespace cflab::testutil;

namespace {

CfSpace tiny_space() { return CfSpace(tiny_z_scheme()); }

GroupElement z(const GroupDescriptor& d, std::int64_t v) {
  return d.element({v});
}

}  // namespace

TEST_CASE("construction validates the embedding requirement") {
  CHECK_NOTHROW(tiny_space());

  // F_1 C_2 = [-1..8] u [29..38] must sit inside F_2; cap F_2 at 30 to break.
  CFScheme bad = tiny_z_scheme();
  bad.shapes[2] = interval_z(bad.group, -20, 30);
  CHECK_THROWS_AS(CfSpace(std::move(bad)), std::invalid_argument);
}

TEST_CASE("cylinders, full levels and validation") {
  const CfSpace sp = tiny_space();
  const auto& d = sp.scheme().group;

  const CompactOpen c0 = sp.cylinder(1, z(d, 0));
  CHECK(c0.level == 1);
  CHECK(c0.names.cardinality() == 1);
  CHECK(sp.full_level(1).names == interval_z(d, -1, 8));
  CHECK(sp.full_level(0).names == FiniteSet::single(d, d.identity()));

  CHECK_THROWS_AS(sp.cylinder(1, z(d, 9)), std::invalid_argument);
  CHECK_THROWS_AS(sp.cylinder(3, z(d, 0)), DepthExceededError);
  CHECK_THROWS_AS(sp.full_level(-1), DepthExceededError);

  // malformed operand: names outside the level shape
  const CompactOpen ragged{1, interval_z(d, 5, 9)};
  CHECK_THROWS_AS(sp.measure(ragged), std::invalid_argument);
}

TEST_CASE("refinement enumerates children and preserves measure") {
  const CfSpace sp = tiny_space();
  const auto& d = sp.scheme().group;
  const CompactOpen c0 = sp.cylinder(1, z(d, 0));

  const CompactOpen r2 = sp.refine(c0, 2);
  CHECK(r2.level == 2);
  CHECK(r2.names == FiniteSet::from_elements(d, {z(d, 0), z(d, 30)}));

  CHECK(sp.refine(c0, 1) == c0);

  const CompactOpen x0 = sp.full_level(0);
  const CompactOpen r02 = sp.refine(x0, 2);
  CHECK(r02.names ==
        FiniteSet::from_elements(d, {z(d, 0), z(d, 30), z(d, 3), z(d, 33)}));

  CHECK(sp.measure(c0) == sp.measure(r2));
  CHECK(sp.measure(x0) == sp.measure(r02));

  CHECK_THROWS_AS(sp.refine(c0, 3), DepthExceededError);
  CHECK_THROWS_AS(sp.refine(r2, 1), std::invalid_argument);
}

TEST_CASE("measure evaluates the cylinder formula exactly") {
  const CfSpace sp = tiny_space();
  const auto& d = sp.scheme().group;
  CHECK(sp.measure(sp.cylinder(1, z(d, 0))) == make_rational(1, 2));
  CHECK(sp.measure(sp.full_level(0)) == Rational(1));
  CHECK(sp.measure(sp.full_level(2)) == make_rational(141, 4));
  CHECK(sp.measure(sp.full_level(1)) == Rational(5));
  CHECK(sp.measure(CompactOpen{2, FiniteSet::empty_set(d)}) == Rational(0));
}

TEST_CASE("action maps, promotes and reports residuals") {
  const CfSpace sp = tiny_space();
  const auto& d = sp.scheme().group;
  const CompactOpen c0 = sp.cylinder(1, z(d, 0));

  SUBCASE("direct hit at the same level") {
    const ActResult r = sp.act(z(d, 3), c0, 2);
    CHECK(r.image == sp.cylinder(1, z(d, 3)));
    CHECK(r.residual.names.empty());
  }
  SUBCASE("promotion by one level") {
    const ActResult r = sp.act(z(d, -2), c0, 2);
    CHECK(r.image.level == 2);
    CHECK(r.image.names == FiniteSet::from_elements(d, {z(d, -2), z(d, 28)}));
    CHECK(r.residual.names.empty());
    CHECK(sp.measure(r.image) == make_rational(1, 2));
  }
  SUBCASE("identity acts trivially") {
    const ActResult r = sp.act(d.identity(), c0, 2);
    CHECK(r.image == c0);
    CHECK(r.residual.names.empty());
  }
  SUBCASE("partial definedness leaves an exact residual") {
    const ActResult r = sp.act(z(d, 100), c0, 2);
    CHECK(r.image == sp.cylinder(2, z(d, 100)));
    CHECK(r.residual.level == 2);
    CHECK(r.residual.names == FiniteSet::single(d, z(d, 30)));
    CHECK(sp.measure(r.image) == make_rational(1, 4));
    CHECK(sp.measure(r.image) + sp.measure(r.residual) == sp.measure(c0));
  }
  SUBCASE("fully undefined action") {
    const ActResult r = sp.act(z(d, 200), c0, 2);
    CHECK(r.image.names.empty());
    CHECK(r.residual.names == FiniteSet::from_elements(d, {z(d, 0), z(d, 30)}));
    CHECK(sp.measure(r.residual) == make_rational(1, 2));
  }
  SUBCASE("mixed-level image is normalized to the deepest level") {
    // g=1 on the full level 1: names -1..7 map in place, name 8 promotes.
    const ActResult r = sp.act(z(d, 1), sp.full_level(1), 2);
    CHECK(r.residual.names.empty());
    CHECK(r.image.level == 2);
    CHECK(r.image.names ==
          set_union(interval_z(d, 0, 9), interval_z(d, 30, 39)));
    CHECK(sp.measure(r.image) == Rational(5));
  }
  SUBCASE("budget bounds") {
    CHECK_THROWS_AS(sp.act(z(d, 1), c0, 3), DepthExceededError);
  }
}

TEST_CASE("boolean operations refine to a common level") {
  const CfSpace sp = tiny_space();
  const auto& d = sp.scheme().group;
  const CompactOpen a = sp.cylinder(1, z(d, 0));
  const CompactOpen b = sp.cylinder(1, z(d, 3));
  const CompactOpen a2 = sp.cylinder(2, z(d, 0));

  CHECK(sp.boolean_op(BoolOp::Intersect, a, a) == a);
  CHECK(sp.boolean_op(BoolOp::Intersect, a, b).names.empty());
  CHECK(sp.boolean_op(BoolOp::Intersect, a, a2) == a2);
  CHECK(sp.boolean_op(BoolOp::Union, a, a2) == sp.refine(a, 2));
  CHECK(sp.boolean_op(BoolOp::Subtract, a, a2) == sp.cylinder(2, z(d, 30)));

  // additivity: mu(AuB) + mu(A^B) = mu(A) + mu(B)
  const auto mu = [&](const CompactOpen& s) { return sp.measure(s); };
  CHECK(mu(sp.boolean_op(BoolOp::Union, a, a2)) +
            mu(sp.boolean_op(BoolOp::Intersect, a, a2)) ==
        mu(a) + mu(a2));
}

TEST_CASE("correlation is the exact overlap measure") {
  const CfSpace sp = tiny_space();
  const auto& d = sp.scheme().group;
  const CompactOpen a = sp.cylinder(1, z(d, 0));
  const CompactOpen a2 = sp.cylinder(2, z(d, 0));

  CHECK(sp.correlation(d.identity(), a, a, 2) == sp.measure(a));
  CHECK(sp.correlation(z(d, 3), a, a, 2) == Rational(0));
  CHECK(sp.correlation(z(d, -2), a, a2, 2) == Rational(0));
  CHECK(sp.correlation(z(d, 30), a, sp.cylinder(2, z(d, 30)), 2) ==
        make_rational(1, 4));
  CHECK_THROWS_AS(sp.correlation(z(d, 100), a, a, 2), UndefinedAtBudgetError);
}

TEST_CASE("action composition and invariance on random instances") {
  const CfSpace sp = tiny_space();
  const auto& d = sp.scheme().group;
  std::mt19937_64 rng(424242);
  std::uniform_int_distribution<std::int64_t> gdist(-12, 12);
  for (int trial = 0; trial < 60; ++trial) {
    const FiniteSet names = random_subset_of(sp.full_level(1).names, rng, d);
    const CompactOpen a{1, names};
    const GroupElement g = z(d, gdist(rng));
    const ActResult r = sp.act(g, a, 2);
    CHECK(sp.measure(r.image) + sp.measure(r.residual) == sp.measure(a));
    if (!r.residual.names.empty()) continue;
    CHECK(sp.measure(r.image) == sp.measure(a));

    const GroupElement h = z(d, gdist(rng));
    const ActResult rh = sp.act(h, a, 2);
    if (!rh.residual.names.empty()) continue;
    const ActResult rgh = sp.act(g, rh.image, 2);
    const ActResult rboth = sp.act(mul(d, g, h), a, 2);
    if (rgh.residual.names.empty() && rboth.residual.names.empty()) {
      const int m = std::max(rgh.image.level, rboth.image.level);
      CHECK(sp.refine(rgh.image, m) == sp.refine(rboth.image, m));
    }
  }
}

TEST_CASE("decay curve on the tiny fixture") {
  const CfSpace sp = tiny_space();
  const auto& d = sp.scheme().group;
  const CompactOpen a = sp.cylinder(1, z(d, 0));
  const std::vector<std::int64_t> radii{0, 1, 2};

  const auto rows = sp.decay_curve(a, a, radii, 2);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::pair<std::int64_t, Rational>{0, make_rational(1, 2)});
  CHECK(rows[1] == std::pair<std::int64_t, Rational>{1, Rational(0)});
  CHECK(rows[2] == std::pair<std::int64_t, Rational>{2, Rational(0)});

  // any thread count yields identical rows
  CHECK(sp.decay_curve(a, a, radii, 2, 4) == rows);

  // a shell element with an unresolved action propagates the budget error
  const std::vector<std::int64_t> far{100};
  CHECK_THROWS_AS(sp.decay_curve(a, a, far, 2), UndefinedAtBudgetError);
}

TEST_CASE("displacement levels certify zero correlation") {
  const CFScheme s = tiny_z_scheme();
  const CfSpace sp(s);
  const auto& d = s.group;
  const GroupElement g = z(d, 1);
  const auto l = check_triangle(s, g, 1, 20);
  REQUIRE(l.has_value());
  CHECK(*l == 10);
  const CompactOpen x1 = sp.full_level(1);
  CHECK(sp.correlation(power(d, g, *l), x1, x1, 2) == Rational(0));
}

TEST_CASE("freeness witness: infinite order branch") {
  const CFScheme s = tiny_z_scheme();
  const auto& d = s.group;
  const FreenessWitness w = freeness_witness(s, z(d, 1), 100, 2);
  CHECK_FALSE(w.torsion);
  CHECK(w.level == 1);
  CHECK(w.displacement == 10);
  CHECK(w.correlation_value == Rational(0));

  CHECK_THROWS_AS(freeness_witness(s, d.identity(), 100, 2),
                  std::invalid_argument);
}

TEST_CASE("freeness witness: torsion branch") {
  const CFScheme s = tiny_dsum_scheme();
  const auto& d = s.group;
  const GroupElement e0 = d.element({1});
  const FreenessWitness w = freeness_witness(s, e0, 100, 2);
  CHECK(w.torsion);
  CHECK(w.order == 2);
  CHECK(w.stabilized_levels == std::vector<int>{1, 2});
  CHECK(w.level == 1);
  REQUIRE(w.orbits.size() == 2);
  CHECK(w.orbits[0] == std::vector<GroupElement>{d.element({0}), d.element({1})});
  CHECK(w.orbits[1] == std::vector<GroupElement>{d.element({2}), d.element({3})});

  // an element stabilizing no level has no witness
  CHECK_THROWS_AS(freeness_witness(s, d.element({16}), 100, 2),
                  SearchExhaustedError);
}

TEST_CASE("power computes group exponents") {
  const auto d = GroupDescriptor::discrete_heisenberg();
  const GroupElement g = d.element({1, 1, 0});
  CHECK(power(d, g, 0) == d.identity());
  CHECK(power(d, g, 1) == g);
  GroupElement it = d.identity();
  for (int i = 0; i < 7; ++i) it = mul(d, it, g);
  CHECK(power(d, g, 7) == it);
}
