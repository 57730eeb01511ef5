#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "cflab/cfspace.hpp"
#include "cflab/rational.hpp"

namespace cflab {

/// Poisson(t) law with pmf access; the distribution of every counting
/// functional of the suspension over a set of measure t.
struct PoissonLaw {
  double t = 0.0;
  double pmf(std::int64_t i) const;
};

/// Seeded realization of the suspension point process at one resolution
/// level: independent per-cylinder counts over region.names.  Only nonzero
/// counts are stored; an absent key means zero.  Regenerating with the same
/// arguments reproduces identical counts.
struct PoissonSample {
  int resolution = 0;
  CompactOpen region;  // at level `resolution`
  std::uint64_t seed = 0;
  std::map<GroupElement, std::int64_t> counts;

  std::int64_t total() const;
};

/// Independent Poisson(mu(cylinder)) draws per level-`level` cylinder of
/// `region`, via CDF inversion from a counter-based stream keyed by
/// (seed, cylinder name).  Iteration order never affects a draw.
PoissonSample sample(const CfSpace& space, const CompactOpen& region,
                     int level, std::uint64_t seed);

/// Number of sample points inside K.  K must be at most as fine as the
/// sample resolution and refine into the region; CoverageError otherwise.
std::int64_t count(const CfSpace& space, const PoissonSample& x,
                   const CompactOpen& k);

/// Moves every point forward by g: the mass at [f] relocates to the
/// cylinder of g f.  The whole region must resolve within `budget`
/// (UndefinedAtBudgetError otherwise).  Cylinders needing a deeper level
/// first split their counts uniformly over their children (seed-keyed, one
/// draw per point), which preserves the total count exactly and the Poisson
/// law in distribution.
PoissonSample transport(const CfSpace& space, const PoissonSample& x,
                        const GroupElement& g, int budget);

/// Goodness-of-fit of one block's empirical counts against its Poisson law.
struct BlockFit {
  Rational mean;  // exact mu(block), the Poisson parameter
  double chi_square = 0.0;
  std::int64_t dof = 0;
  double p_value = 1.0;
};

struct CoarsenStats {
  std::int64_t trials = 0;
  double significance = 0.0;
  std::vector<BlockFit> blocks;
  double max_abs_correlation = 0.0;
  double correlation_threshold = 0.0;  // 4 / sqrt(trials)
  bool chi_square_pass = false;        // every block p-value >= significance
  bool independence_pass = false;      // max |rho| < threshold
};

/// Checks over `trials` fresh samples of (region, level) that coarse counts
/// keep the Poisson law (chi-square per block, bins pooled so each expected
/// mass is >= 5) and that disjoint blocks are empirically uncorrelated.
/// Blocks must be pairwise disjoint and contained in the region.
CoarsenStats coarsen_check(const CfSpace& space, const CompactOpen& region,
                           int level, const std::vector<CompactOpen>& blocks,
                           std::int64_t trials, std::uint64_t seed,
                           double significance = 0.01);

/// Covariance of the counting functionals: Cov(N_A after moving by g, N_B)
/// equals mu(T_g A intersect B) exactly, so this is the correlation
/// functional of the underlying space.
Rational exact_covariance(const CfSpace& space, const GroupElement& g,
                          const CompactOpen& a, const CompactOpen& b,
                          int budget);

struct McCovariance {
  double estimate = 0.0;
  double stderr_value = 0.0;
  std::int64_t trials = 0;
};

/// Monte-Carlo estimate of the same covariance from `trials` seeded
/// samples; brackets exact_covariance within a few standard errors.  The
/// sampling region is the largest part of the common level that stays
/// resolvable when moved by g^{-1}; moving the sample by g^{-1} makes the
/// first factor count the points lying in T_g A, so the expectation is
/// exactly mu(T_g A intersect B).
McCovariance mc_covariance(const CfSpace& space, const GroupElement& g,
                           const CompactOpen& a, const CompactOpen& b,
                           std::int64_t trials, std::uint64_t seed,
                           int budget);

}  // namespace cflab
