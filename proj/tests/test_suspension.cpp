#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cflab/cfspace.hpp"
#include "cflab/entropy.hpp"
#include "cflab/rng.hpp"
#include "cflab/suspension.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cflab;
using namespace cflab::testutil;

TEST_CASE("poisson entropy at zero and tiny arguments") {
  CHECK(poisson_entropy(0.0) == 0.0);
  CHECK(poisson_entropy_factorial_form(0.0) == 0.0);
  // -t ln t + t dominates near zero
  CHECK(poisson_entropy(1e-6) < 2e-5);
  CHECK(poisson_entropy(1e-6) > 1e-5);
  CHECK_THROWS_AS(poisson_entropy(-0.25), std::domain_error);
  CHECK_THROWS_AS(poisson_entropy_factorial_form(-1.0), std::domain_error);
  CHECK_THROWS_AS(poisson_entropy(std::nan("")), std::domain_error);
}

TEST_CASE("poisson entropy matches high-precision references") {
  // 50-digit summation references: f(1/2), f(1/4)
  CHECK(std::abs(poisson_entropy(0.5) - 0.9276374674957973741) < 1e-13);
  CHECK(std::abs(poisson_entropy(0.25) - 0.6175119998423525915) < 1e-13);
  CHECK(poisson_entropy(0.25) < poisson_entropy(0.5));
}

TEST_CASE("independent entropy routes agree") {
  for (double t : {1e-6, 1e-3, 0.01, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0,
                   35.25}) {
    const double a = poisson_entropy(t);
    const double b = poisson_entropy_factorial_form(t);
    CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
    CHECK(a >= 0.0);
  }
}

TEST_CASE("entropy bound curve for the depth-two fixture") {
  const EntropyCurve curve = entropy_bound_curve(tiny_z_scheme());
  REQUIRE(curve.points.size() == 2);
  CHECK(curve.points[0].n == 1);
  CHECK(curve.points[0].mu == make_rational(1, 2));
  CHECK(curve.points[0].f_nats == poisson_entropy(0.5));
  CHECK(curve.points[1].n == 2);
  CHECK(curve.points[1].mu == make_rational(1, 4));
  CHECK(curve.points[1].f_nats == poisson_entropy(0.25));
  CHECK(curve.points[1].f_nats < curve.points[0].f_nats);
  CHECK(curve.decreasing);
}

TEST_CASE("entropy bound curve degenerate and growing-copy cases") {
  const CFScheme base = tiny_z_scheme();

  CFScheme depth1{base.group, {base.shapes[0], base.shapes[1]},
                  {base.copies[0]}};
  const EntropyCurve single = entropy_bound_curve(depth1);
  REQUIRE(single.points.size() == 1);
  CHECK(single.points[0].mu == make_rational(1, 2));
  CHECK(single.decreasing);

  // #C_n = n+1 gives mu([1]_n) = 1/(n+1)!
  const GroupDescriptor d = base.group;
  CFScheme grow = base;
  grow.copies[1] = FiniteSet::from_elements(
      d, {d.element({0}), d.element({30}), d.element({60})});
  const EntropyCurve fast = entropy_bound_curve(grow);
  REQUIRE(fast.points.size() == 2);
  CHECK(fast.points[0].mu == make_rational(1, 2));
  CHECK(fast.points[1].mu == make_rational(1, 6));
  CHECK(fast.decreasing);

  CFScheme empty{d, {base.shapes[0]}, {}};
  CHECK_THROWS_AS(entropy_bound_curve(empty), std::invalid_argument);
}

TEST_CASE("poisson law pmf is a probability law with matching moments") {
  const PoissonLaw law{35.25};
  double sum = 0, mean = 0, var = 0;
  for (int k = 0; k <= 300; ++k) {
    const double p = law.pmf(k);
    sum += p;
    mean += double(k) * p;
    var += (double(k) - 35.25) * (double(k) - 35.25) * p;
  }
  CHECK(std::abs(sum - 1.0) < 1e-12);
  CHECK(std::abs(mean - 35.25) < 1e-10);
  CHECK(std::abs(var - 35.25) < 1e-10);

  const PoissonLaw point{0.0};
  CHECK(point.pmf(0) == 1.0);
  CHECK(point.pmf(3) == 0.0);
  CHECK(law.pmf(-1) == 0.0);
}

TEST_CASE("sampler is deterministic and respects the region") {
  const CfSpace sp(tiny_z_scheme());
  const CompactOpen x2 = sp.full_level(2);

  const PoissonSample a = sample(sp, x2, 2, 42);
  const PoissonSample b = sample(sp, x2, 2, 42);
  CHECK(a.counts == b.counts);
  CHECK(a.region == b.region);
  CHECK(a.total() == 44);  // frozen draw for seed 42

  const PoissonSample c = sample(sp, x2, 2, 43);
  CHECK(a.counts != c.counts);

  for (const auto& [name, k] : a.counts) {
    CHECK(a.region.names.contains(name));
    CHECK(k > 0);  // zero counts stay unstored
  }

  const CompactOpen none{1, FiniteSet::empty_set(sp.scheme().group)};
  const PoissonSample e = sample(sp, none, 2, 7);
  CHECK(e.counts.empty());
  CHECK(e.total() == 0);
}

TEST_CASE("sampler total count matches the exact intensity over many seeds") {
  const CfSpace sp(tiny_z_scheme());
  const CompactOpen x2 = sp.full_level(2);
  CHECK(sp.measure(x2) == make_rational(141, 4));

  double tot = 0;
  for (int j = 0; j < 10000; ++j)
    tot += double(sample(sp, x2, 2, std::uint64_t(j)).total());
  const double mean = tot / 1e4;
  // law of large numbers: 3 sigma band around 141/4
  CHECK(std::abs(mean - 35.25) < 3.0 * std::sqrt(35.25 / 1e4));
}

TEST_CASE("sampler marginals have poisson mean and variance") {
  const CfSpace sp(tiny_z_scheme());
  const GroupDescriptor& d = sp.scheme().group;
  const CompactOpen x2 = sp.full_level(2);
  const CompactOpen cyl = sp.cylinder(2, d.element({0}));

  double m1 = 0, m2 = 0;
  const int n = 10000;
  for (int j = 0; j < n; ++j) {
    const double c = double(count(sp, sample(sp, x2, 2, std::uint64_t(j)), cyl));
    m1 += c;
    m2 += c * c;
  }
  m1 /= double(n);
  const double var = (m2 - double(n) * m1 * m1) / double(n - 1);
  // mean and variance both equal mu = 1/4; 4 standard errors each
  CHECK(std::abs(m1 - 0.25) < 4.0 * std::sqrt(0.25 / double(n)));
  CHECK(std::abs(var - 0.25) <
        4.0 * std::sqrt((0.25 + 2.0 * 0.0625) / double(n)));
}

TEST_CASE("count is additive over refinement and rejects uncovered sets") {
  const CfSpace sp(tiny_z_scheme());
  const GroupDescriptor& d = sp.scheme().group;
  const CompactOpen x2 = sp.full_level(2);
  const CompactOpen c0 = sp.cylinder(1, d.element({0}));

  for (int j = 0; j < 100; ++j) {
    const PoissonSample x = sample(sp, x2, 2, std::uint64_t(1000 + j));
    const std::int64_t coarse = count(sp, x, c0);
    const std::int64_t fine = count(sp, x, sp.cylinder(2, d.element({0}))) +
                              count(sp, x, sp.cylinder(2, d.element({30})));
    CHECK(coarse == fine);
  }

  const PoissonSample x = sample(sp, x2, 2, 9);
  CHECK(count(sp, x, CompactOpen{2, FiniteSet::empty_set(d)}) == 0);
  CHECK(count(sp, x, x2) == x.total());

  // region smaller than the full level: counting outside it is an error
  const PoissonSample small = sample(sp, c0, 2, 9);
  CHECK_THROWS_AS(count(sp, small, sp.cylinder(1, d.element({3}))),
                  CoverageError);

  // a set finer than the sample resolution cannot be counted
  const PoissonSample coarse = sample(sp, sp.full_level(1), 1, 9);
  CHECK_THROWS_AS(count(sp, coarse, sp.cylinder(2, d.element({0}))),
                  CoverageError);
}

TEST_CASE("transport by the identity is the identity") {
  const CfSpace sp(tiny_z_scheme());
  const PoissonSample x = sample(sp, sp.full_level(2), 2, 11);
  const PoissonSample y = transport(sp, x, sp.scheme().group.identity(), 2);
  CHECK(y.resolution == x.resolution);
  CHECK(y.region == x.region);
  CHECK(y.counts == x.counts);
}

TEST_CASE("transport splits an occupied coarse cylinder to the working level") {
  const CfSpace sp(tiny_z_scheme());
  const GroupDescriptor& d = sp.scheme().group;
  const GroupElement g = d.element({-2});

  // one point sitting in [0]_1
  PoissonSample x;
  x.resolution = 1;
  x.region = sp.full_level(1);
  x.seed = 5;
  x.counts.emplace(d.element({0}), 1);

  const PoissonSample y = transport(sp, x, g, 2);
  CHECK(y.resolution == 2);
  CHECK(y.region == sp.act(g, sp.full_level(1), 2).image);
  CHECK(y.total() == 1);
  // the occupied cylinder refines to {0, 30}, so the moved point lands in
  // [-2]_2 or [28]_2 according to the seeded split
  const std::int64_t at_m2 = count(sp, y, sp.cylinder(2, d.element({-2})));
  const std::int64_t at_28 = count(sp, y, sp.cylinder(2, d.element({28})));
  CHECK(at_m2 + at_28 == 1);

  const PoissonSample y2 = transport(sp, x, g, 2);
  CHECK(y.counts == y2.counts);  // split draws are seed-keyed
}

TEST_CASE("transport preserves totals and satisfies the count pullback") {
  const CfSpace sp(tiny_z_scheme());
  const GroupDescriptor& d = sp.scheme().group;
  const GroupElement g = d.element({3});
  const GroupElement gi = d.element({-3});
  // the largest level-2 region that moves by 3 without leaving the top shape
  const CompactOpen region{2, interval_z(d, -20, 117)};

  for (int j = 0; j < 30; ++j) {
    const PoissonSample x = sample(sp, region, 2, std::uint64_t(j));
    const PoissonSample y = transport(sp, x, g, 2);
    CHECK(y.total() == x.total());
    for (std::int64_t name : {-5, 0, 30, 100}) {
      const CompactOpen k = sp.cylinder(2, d.element({name}));
      const CompactOpen pulled{2, left_translate(d, gi, k.names)};
      CHECK(count(sp, y, k) == count(sp, x, pulled));
    }
  }

  // moving the full top level by 3 pushes three cylinders out of the shape
  const PoissonSample x = sample(sp, sp.full_level(2), 2, 0);
  CHECK_THROWS_AS(transport(sp, x, g, 2), UndefinedAtBudgetError);
}

TEST_CASE("coarsen check validates blocks and confirms the coarse laws") {
  const CfSpace sp(tiny_z_scheme());
  const GroupDescriptor& d = sp.scheme().group;
  const CompactOpen x2 = sp.full_level(2);
  const CompactOpen b0 = sp.cylinder(1, d.element({0}));
  const CompactOpen b3 = sp.cylinder(1, d.element({3}));

  CHECK_THROWS_AS(coarsen_check(sp, x2, 2, {b0, b0}, 100, 0),
                  std::invalid_argument);  // overlap
  CHECK_THROWS_AS(coarsen_check(sp, b0, 2, {b3}, 100, 0),
                  std::invalid_argument);  // outside region
  CHECK_THROWS_AS(coarsen_check(sp, x2, 2, {b0}, 1, 0),
                  std::invalid_argument);  // too few trials

  // disjoint blocks are uncorrelated and each keeps its Poisson law;
  // the chi-square verdict is flaky-tolerant: majority over three runs
  int chi_votes = 0;
  for (std::uint64_t s : {0ull, 1ull, 2ull}) {
    const CoarsenStats st = coarsen_check(sp, x2, 2, {b0, b3}, 10000, s);
    REQUIRE(st.blocks.size() == 2);
    CHECK(st.blocks[0].mean == make_rational(1, 2));
    CHECK(st.correlation_threshold == 4.0 / 100.0);
    CHECK(st.max_abs_correlation < 0.04);
    CHECK(st.independence_pass);
    if (st.chi_square_pass) ++chi_votes;
  }
  CHECK(chi_votes >= 2);

  // single block: the sampler's own marginal
  int single_votes = 0;
  for (std::uint64_t s : {0ull, 1ull, 2ull}) {
    const CoarsenStats st =
        coarsen_check(sp, x2, 2, {sp.cylinder(2, d.element({0}))}, 10000, s);
    CHECK(st.independence_pass);  // vacuous with one block
    if (st.chi_square_pass) ++single_votes;
  }
  CHECK(single_votes >= 2);

  // union of the two level-2 children of [0]_1: counts sum to Poisson(1/2)
  int union_votes = 0;
  for (std::uint64_t s : {0ull, 1ull, 2ull}) {
    const CoarsenStats st = coarsen_check(sp, x2, 2, {b0}, 10000, s);
    CHECK(st.blocks[0].mean == make_rational(1, 2));
    if (st.chi_square_pass) ++union_votes;
  }
  CHECK(union_votes >= 2);
}

TEST_CASE("exact covariance is the correlation functional") {
  const CfSpace sp(tiny_z_scheme());
  const GroupDescriptor& d = sp.scheme().group;
  const CompactOpen b0 = sp.cylinder(1, d.element({0}));
  const CompactOpen b3 = sp.cylinder(1, d.element({3}));

  // identity: the variance of a Poisson count is its parameter
  CHECK(exact_covariance(sp, d.identity(), b0, b0, 2) == make_rational(1, 2));
  CHECK(exact_covariance(sp, d.element({3}), b0, b0, 2) == Rational(0));
  CHECK(exact_covariance(sp, d.element({3}), b0, b3, 2) ==
        make_rational(1, 2));
  // disjoint sets with disjoint translate
  CHECK(exact_covariance(sp, d.element({1}), sp.cylinder(2, d.element({0})),
                         sp.cylinder(2, d.element({5})), 2) == Rational(0));
  CHECK(exact_covariance(sp, d.element({30}), b0, b0, 2) ==
        make_rational(1, 4));
  CHECK(exact_covariance(sp, d.element({3}), b0, b0, 2) ==
        sp.correlation(d.element({3}), b0, b0, 2));
  CHECK_THROWS_AS(exact_covariance(sp, d.element({100}), b0, b0, 2),
                  UndefinedAtBudgetError);
}

TEST_CASE("monte carlo covariance brackets the exact value") {
  const CfSpace sp(tiny_z_scheme());
  const GroupDescriptor& d = sp.scheme().group;
  const CompactOpen b0 = sp.cylinder(1, d.element({0}));
  const CompactOpen b3 = sp.cylinder(1, d.element({3}));

  struct Case {
    std::int64_t g;
    const CompactOpen *a, *b;
  };
  for (const Case& c : {Case{0, &b0, &b0},    // variance case, exact 1/2
                        Case{3, &b0, &b0},    // displaced, exact 0
                        Case{3, &b0, &b3}}) { // asymmetric, exact 1/2
    const GroupElement g = d.element({c.g});
    const McCovariance mc = mc_covariance(sp, g, *c.a, *c.b, 10000, 0, 2);
    const double exact = to_double(exact_covariance(sp, g, *c.a, *c.b, 2));
    CHECK(mc.trials == 10000);
    CHECK(mc.stderr_value > 0.0);
    CHECK(std::abs(mc.estimate - exact) <= 3.0 * mc.stderr_value);
  }

  CHECK_THROWS_AS(mc_covariance(sp, d.identity(), b0, b0, 0, 0, 2),
                  std::invalid_argument);
  // moving [0]_2 backward by 30 exits the depth-2 space, so B cannot be
  // observed on any resolvable sampling region
  CHECK_THROWS_AS(mc_covariance(sp, d.element({30}), b0, b0, 100, 0, 2),
                  UndefinedAtBudgetError);
}

TEST_CASE("counter-based stream is pure and uniform-ish") {
  CHECK(stream_word(1, 2, 3) == stream_word(1, 2, 3));
  CHECK(stream_word(1, 2, 3) != stream_word(1, 2, 4));
  CHECK(stream_word(1, 2, 3) != stream_word(2, 2, 3));

  double acc = 0;
  for (int i = 0; i < 4096; ++i) {
    const double u = stream_uniform(7, 9, std::uint64_t(i));
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    acc += u;
  }
  CHECK(std::abs(acc / 4096.0 - 0.5) < 0.02);

  const GroupDescriptor d = GroupDescriptor::integer_lattice(2);
  CHECK(element_key(d.element({1, 2})) == element_key(d.element({1, 2})));
  CHECK(element_key(d.element({1, 2})) != element_key(d.element({2, 1})));

  // inversion against the closed-form cdf for t = 1/4
  const double t = 0.25;
  const double p0 = std::exp(-t);
  CHECK(poisson_inverse(t, p0 / 2) == 0);
  CHECK(poisson_inverse(t, p0 + 0.01) == 1);
  CHECK(poisson_inverse(t, 0.9999) == 4);
}
