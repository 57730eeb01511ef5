#include "cflab/suspension.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "cflab/rng.hpp"

namespace cflab {
namespace {

// Stream roles, so the same cylinder never reuses a draw across purposes.
constexpr std::uint64_t kRoleCount = 1;
constexpr std::uint64_t kRoleSplit = 2;
constexpr std::uint64_t kRoleTrial = 3;

std::uint64_t trial_seed(std::uint64_t seed, std::int64_t j) {
  return stream_word(seed, kRoleTrial, std::uint64_t(j));
}

// Pearson correlation; 0 for a degenerate (constant) series.
double correlation_of(const std::vector<std::int64_t>& a,
                      const std::vector<std::int64_t>& b) {
  const std::size_t n = a.size();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += double(a[i]);
    mb += double(b[i]);
  }
  ma /= double(n);
  mb /= double(n);
  double cab = 0, caa = 0, cbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = double(a[i]) - ma, db = double(b[i]) - mb;
    cab += da * db;
    caa += da * da;
    cbb += db * db;
  }
  if (caa == 0.0 || cbb == 0.0) return 0.0;
  return cab / std::sqrt(caa * cbb);
}

// Chi-square fit of observed counts against Poisson(mean), bins pooled
// left-to-right until each expected mass is >= 5; the final bin absorbs the
// entire upper tail.
BlockFit chi_square_fit(const std::vector<std::int64_t>& observed,
                        const Rational& mean) {
  BlockFit fit;
  fit.mean = mean;
  const std::int64_t trials = std::int64_t(observed.size());
  const PoissonLaw law{to_double(mean)};

  std::int64_t kmax = 0;
  for (std::int64_t c : observed) kmax = std::max(kmax, c);
  std::vector<std::int64_t> hist(std::size_t(kmax) + 1, 0);
  for (std::int64_t c : observed) ++hist[std::size_t(c)];

  std::vector<double> pooled_exp;
  std::vector<std::int64_t> pooled_obs;
  double acc_exp = 0, cdf = 0;
  std::int64_t acc_obs = 0;
  for (std::int64_t k = 0; k <= kmax; ++k) {
    double pk;
    if (k == kmax) {
      pk = 1.0 - cdf;  // everything at or above the largest observation
    } else {
      pk = law.pmf(k);
      cdf += pk;
    }
    acc_exp += double(trials) * pk;
    acc_obs += hist[std::size_t(k)];
    if (acc_exp >= 5.0) {
      pooled_exp.push_back(acc_exp);
      pooled_obs.push_back(acc_obs);
      acc_exp = 0;
      acc_obs = 0;
    }
  }
  if (acc_exp > 0 || acc_obs > 0) {
    if (pooled_exp.empty()) {
      pooled_exp.push_back(acc_exp);
      pooled_obs.push_back(acc_obs);
    } else {
      pooled_exp.back() += acc_exp;
      pooled_obs.back() += acc_obs;
    }
  }

  double stat = 0;
  for (std::size_t i = 0; i < pooled_exp.size(); ++i) {
    const double diff = double(pooled_obs[i]) - pooled_exp[i];
    stat += diff * diff / pooled_exp[i];
  }
  fit.chi_square = stat;
  fit.dof = std::int64_t(pooled_exp.size()) - 1;
  fit.p_value = fit.dof > 0
                    ? boost::math::gamma_q(double(fit.dof) / 2.0, stat / 2.0)
                    : 1.0;
  return fit;
}

}  // namespace

double PoissonLaw::pmf(std::int64_t i) const {
  if (i < 0) return 0.0;
  if (t == 0.0) return i == 0 ? 1.0 : 0.0;
  return std::exp(-t + double(i) * std::log(t) -
                  std::lgamma(double(i) + 1.0));
}

std::int64_t PoissonSample::total() const {
  std::int64_t s = 0;
  for (const auto& [name, k] : counts) s += k;
  return s;
}

PoissonSample sample(const CfSpace& space, const CompactOpen& region,
                     int level, std::uint64_t seed) {
  const CompactOpen at = space.refine(region, level);
  PoissonSample x;
  x.resolution = level;
  x.region = at;
  x.seed = seed;
  if (at.names.empty()) return x;
  const GroupDescriptor& d = space.scheme().group;
  // every cylinder of one level has the same exact measure
  const Rational mu1 = space.measure(
      CompactOpen{level, FiniteSet::single(d, at.names.element_at(d, 0))});
  const double t = to_double(mu1);
  for (const GroupElement& name : at.names.elements(d)) {
    const double u = stream_uniform(seed, cylinder_key(level, name, kRoleCount), 0);
    const std::int64_t k = poisson_inverse(t, u);
    if (k > 0) x.counts.emplace(name, k);
  }
  return x;
}

std::int64_t count(const CfSpace& space, const PoissonSample& x,
                   const CompactOpen& k) {
  if (k.level > x.resolution)
    throw CoverageError("count: set at level " + std::to_string(k.level) +
                        " is finer than the sample resolution " +
                        std::to_string(x.resolution));
  const CompactOpen kk = space.refine(k, x.resolution);
  if (!kk.names.is_subset_of(x.region.names))
    throw CoverageError("count: set extends outside the sample region");
  std::int64_t s = 0;
  for (const auto& [name, c] : x.counts)
    if (kk.names.contains(name)) s += c;
  return s;
}

PoissonSample transport(const CfSpace& space, const PoissonSample& x,
                        const GroupElement& g, int budget) {
  const GroupDescriptor& d = space.scheme().group;
  require_same_kind(d, g, "transport");
  const ActResult moved = space.act(g, x.region, budget);
  if (!moved.residual.names.empty())
    throw UndefinedAtBudgetError(
        "transport: region does not resolve within budget " +
        std::to_string(budget) + " (" +
        std::to_string(moved.residual.names.cardinality()) +
        " cylinders undefined at level " +
        std::to_string(moved.residual.level) + ")");
  const int target = moved.image.level;

  PoissonSample y;
  y.resolution = target;
  y.region = moved.image;
  y.seed = x.seed;
  for (const auto& [name, k] : x.counts) {
    // Walk this cylinder's points down to the working level, one uniform
    // child choice per point and stage, then move every leaf by g.  A name
    // that already maps inside a shallower shape keeps mapping inside the
    // deeper ones, so each leaf lands in the image.
    std::vector<std::pair<GroupElement, std::int64_t>> mass{{name, k}};
    for (int m = x.resolution; m < target; ++m) {
      const auto kids = space.scheme().c_at(m + 1).elements(d);
      std::map<GroupElement, std::int64_t> next;
      for (const auto& [a, ka] : mass) {
        const std::uint64_t key = cylinder_key(m, a, kRoleSplit);
        for (std::int64_t j = 0; j < ka; ++j) {
          const double u = stream_uniform(x.seed, key, std::uint64_t(j));
          const std::size_t pick = std::min(
              kids.size() - 1, std::size_t(u * double(kids.size())));
          ++next[mul(d, a, kids[pick])];
        }
      }
      mass.assign(next.begin(), next.end());
    }
    for (const auto& [a, ka] : mass) {
      const GroupElement image = mul(d, g, a);
      if (!y.region.names.contains(image))
        throw std::logic_error("transport: image left the moved region");
      y.counts[image] += ka;
    }
  }
  return y;
}

CoarsenStats coarsen_check(const CfSpace& space, const CompactOpen& region,
                           int level, const std::vector<CompactOpen>& blocks,
                           std::int64_t trials, std::uint64_t seed,
                           double significance) {
  if (trials < 2)
    throw std::invalid_argument("coarsen_check: need at least two trials");
  if (blocks.empty())
    throw std::invalid_argument("coarsen_check: no blocks given");
  const CompactOpen base = space.refine(region, level);
  std::vector<CompactOpen> at_level;
  for (const CompactOpen& b : blocks) {
    CompactOpen r = space.refine(b, level);
    if (!r.names.is_subset_of(base.names))
      throw std::invalid_argument("coarsen_check: block outside the region");
    for (const CompactOpen& prev : at_level)
      if (r.names.intersects(prev.names))
        throw std::invalid_argument("coarsen_check: blocks overlap");
    at_level.push_back(std::move(r));
  }

  const std::size_t nb = at_level.size();
  std::vector<std::vector<std::int64_t>> series(
      nb, std::vector<std::int64_t>(std::size_t(trials)));
  for (std::int64_t j = 0; j < trials; ++j) {
    const PoissonSample x = sample(space, base, level, trial_seed(seed, j));
    for (std::size_t b = 0; b < nb; ++b)
      series[b][std::size_t(j)] = count(space, x, at_level[b]);
  }

  CoarsenStats st;
  st.trials = trials;
  st.significance = significance;
  st.correlation_threshold = 4.0 / std::sqrt(double(trials));
  st.chi_square_pass = true;
  for (std::size_t b = 0; b < nb; ++b) {
    BlockFit fit = chi_square_fit(series[b], space.measure(at_level[b]));
    if (fit.p_value < significance) st.chi_square_pass = false;
    st.blocks.push_back(std::move(fit));
  }
  st.max_abs_correlation = 0.0;
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = i + 1; j < nb; ++j)
      st.max_abs_correlation =
          std::max(st.max_abs_correlation,
                   std::abs(correlation_of(series[i], series[j])));
  st.independence_pass =
      nb < 2 || st.max_abs_correlation < st.correlation_threshold;
  return st;
}

Rational exact_covariance(const CfSpace& space, const GroupElement& g,
                          const CompactOpen& a, const CompactOpen& b,
                          int budget) {
  return space.correlation(g, a, b, budget);
}

McCovariance mc_covariance(const CfSpace& space, const GroupElement& g,
                           const CompactOpen& a, const CompactOpen& b,
                           std::int64_t trials, std::uint64_t seed,
                           int budget) {
  if (trials < 2)
    throw std::invalid_argument("mc_covariance: need at least two trials");
  const GroupDescriptor& d = space.scheme().group;
  require_same_kind(d, g, "mc_covariance");
  const GroupElement gi = inv(d, g);
  const int m = std::max(a.level, b.level);

  // Sampling region: drop the cylinders of X_m that cannot be moved by
  // g^{-1} within the budget; what survives resolves in a single step.
  const CompactOpen full = space.full_level(m);
  const ActResult probe = space.act(gi, full, budget);
  const CompactOpen region =
      space.boolean_op(BoolOp::Subtract, full, probe.residual);
  if (region.names.empty())
    throw UndefinedAtBudgetError(
        "mc_covariance: no resolvable sampling region at budget " +
        std::to_string(budget));
  const ActResult moved = space.act(gi, region, budget);
  if (!space.refine(b, region.level).names.is_subset_of(region.names))
    throw UndefinedAtBudgetError(
        "mc_covariance: B leaves the resolvable sampling region");
  // Counting the moved sample over A automatically restricts to the part of
  // T_g A inside the region.  The lost part is disjoint from B, hence
  // independent of N_B, and the B factor is exactly mean-zero, so the
  // estimator stays unbiased; only B itself must be fully observable.
  const CompactOpen a_observed =
      space.boolean_op(BoolOp::Intersect, a, moved.image);

  const double mu_a = to_double(space.measure(a));
  const double mu_b = to_double(space.measure(b));
  double sum = 0, sumsq = 0;
  for (std::int64_t j = 0; j < trials; ++j) {
    const PoissonSample x =
        sample(space, region, region.level, trial_seed(seed, j));
    const PoissonSample y = transport(space, x, gi, budget);
    const double term = (double(count(space, y, a_observed)) - mu_a) *
                        (double(count(space, x, b)) - mu_b);
    sum += term;
    sumsq += term * term;
  }
  McCovariance out;
  out.trials = trials;
  out.estimate = sum / double(trials);
  const double var =
      std::max(0.0, (sumsq - sum * sum / double(trials)) / double(trials - 1));
  out.stderr_value = std::sqrt(var / double(trials));
  return out;
}

}  // namespace cflab
