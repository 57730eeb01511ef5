#include "cflab/cfspace.hpp"

#include <algorithm>
#include <exception>
#include <set>
#include <stdexcept>
#include <thread>

#include "cflab/errors.hpp"

namespace cflab {

CfSpace::CfSpace(CFScheme scheme) : s_(std::move(scheme)) {
  s_.validate_structure();
  denom_.reserve(std::size_t(s_.depth()) + 1);
  denom_.push_back(1);
  for (int n = 1; n <= s_.depth(); ++n)
    denom_.push_back(denom_.back() * s_.c_at(n).cardinality());
  for (int n = 0; n < s_.depth(); ++n) {
    const FiniteSet stack = set_product(s_.group, s_.f_at(n), s_.c_at(n + 1));
    if (!stack.is_subset_of(s_.f_at(n + 1)))
      throw std::invalid_argument(
          "CfSpace: level " + std::to_string(n) +
          " cylinder children leave the next shape (F_n C_{n+1} must be "
          "inside F_{n+1})");
  }
}

void CfSpace::validate(const CompactOpen& a, const char* where) const {
  if (a.level < 0 || a.level > s_.depth())
    throw DepthExceededError(std::string(where) +
                             ": level outside the stored scheme");
  if (!a.names.is_subset_of(s_.f_at(a.level)))
    throw std::invalid_argument(std::string(where) +
                                ": names not contained in the level shape");
}

FiniteSet CfSpace::child_names(const FiniteSet& names, int level) const {
  const FiniteSet next = set_product(s_.group, names, s_.c_at(level + 1));
  if (next.cardinality() !=
      names.cardinality() * s_.c_at(level + 1).cardinality())
    throw std::logic_error(
        "refinement collision: copy translates overlap at level " +
        std::to_string(level + 1));
  return next;
}

CompactOpen CfSpace::cylinder(int level, const GroupElement& name) const {
  require_same_kind(s_.group, name, "cylinder");
  CompactOpen a{level, FiniteSet::single(s_.group, name)};
  validate(a, "cylinder");
  return a;
}

CompactOpen CfSpace::full_level(int level) const {
  if (level < 0 || level > s_.depth())
    throw DepthExceededError("full_level: level outside the stored scheme");
  return {level, s_.f_at(level)};
}

CompactOpen CfSpace::refine(const CompactOpen& a, int m) const {
  validate(a, "refine");
  if (m > s_.depth())
    throw DepthExceededError("refine: target level exceeds scheme depth");
  if (m < a.level)
    throw std::invalid_argument("refine: target level below the current one");
  CompactOpen out{a.level, a.names};
  while (out.level < m) {
    out.names = child_names(out.names, out.level);
    ++out.level;
  }
  return out;
}

Rational CfSpace::measure(const CompactOpen& a) const {
  validate(a, "measure");
  return Rational(BigInt(a.names.cardinality()), denom_[std::size_t(a.level)]);
}

ActResult CfSpace::act(const GroupElement& g, const CompactOpen& a,
                       int budget) const {
  validate(a, "act");
  require_same_kind(s_.group, g, "act");
  if (budget > s_.depth())
    throw DepthExceededError("act: budget exceeds scheme depth");
  const int cap = std::max(a.level, budget);
  const GroupElement ginv = inv(s_.group, g);

  int m = a.level;
  FiniteSet undef = a.names;
  std::vector<std::pair<int, FiniteSet>> pieces;  // (level, mapped g-names)
  while (true) {
    const FiniteSet moved = left_translate(s_.group, g, undef);
    const FiniteSet ok = set_intersect(moved, s_.f_at(m));
    if (!ok.empty()) {
      pieces.emplace_back(m, ok);
      undef = set_subtract(undef, left_translate(s_.group, ginv, ok));
    }
    if (undef.empty() || m >= cap) break;
    undef = child_names(undef, m);
    ++m;
  }

  int top = a.level;
  for (const auto& [lvl, nm] : pieces)
    if (!nm.empty()) top = std::max(top, lvl);
  FiniteSet image = FiniteSet::empty_set(s_.group);
  for (const auto& [lvl, nm] : pieces) {
    FiniteSet at_top = nm;
    for (int k = lvl; k < top; ++k) at_top = child_names(at_top, k);
    image = set_union(image, at_top);
  }
  return ActResult{CompactOpen{top, std::move(image)},
                   CompactOpen{m, std::move(undef)}};
}

CompactOpen CfSpace::boolean_op(BoolOp op, const CompactOpen& a,
                                const CompactOpen& b) const {
  validate(a, "boolean_op");
  validate(b, "boolean_op");
  const int m = std::max(a.level, b.level);
  const FiniteSet na = refine(a, m).names;
  const FiniteSet nb = refine(b, m).names;
  switch (op) {
    case BoolOp::Intersect:
      return {m, set_intersect(na, nb)};
    case BoolOp::Union:
      return {m, set_union(na, nb)};
    case BoolOp::Subtract:
      return {m, set_subtract(na, nb)};
  }
  throw std::logic_error("boolean_op: unknown operation");
}

Rational CfSpace::correlation(const GroupElement& g, const CompactOpen& a,
                              const CompactOpen& b, int budget) const {
  const ActResult r = act(g, a, budget);
  if (!r.residual.names.empty())
    throw UndefinedAtBudgetError(
        "correlation: action of " + to_string(g) + " on " +
        std::to_string(r.residual.names.cardinality()) +
        " level-" + std::to_string(r.residual.level) +
        " cylinders is unresolved at the level budget " +
        std::to_string(budget));
  return measure(boolean_op(BoolOp::Intersect, r.image, b));
}

std::vector<std::pair<std::int64_t, Rational>> CfSpace::decay_curve(
    const CompactOpen& a, const CompactOpen& b,
    std::span<const std::int64_t> radii, int budget, int threads) const {
  validate(a, "decay_curve");
  validate(b, "decay_curve");
  if (threads < 1)
    throw std::invalid_argument("decay_curve: thread count must be >= 1");
  std::vector<std::pair<std::int64_t, Rational>> rows;
  rows.reserve(radii.size());
  for (const std::int64_t r : radii) {
    const std::vector<GroupElement> elems =
        shell(s_.group, r).elements(s_.group, std::int64_t(1) << 22);
    const int nthreads =
        int(std::min<std::size_t>(std::size_t(threads), elems.size()));
    std::vector<Rational> best(std::size_t(std::max(nthreads, 1)), Rational(0));
    std::vector<std::size_t> fail_at(std::size_t(std::max(nthreads, 1)),
                                     elems.size());
    std::vector<std::exception_ptr> errors(std::size_t(std::max(nthreads, 1)));
    auto work = [&](int t) {
      for (std::size_t i = std::size_t(t); i < elems.size();
           i += std::size_t(nthreads)) {
        try {
          const Rational c = correlation(elems[i], a, b, budget);
          if (c > best[std::size_t(t)]) best[std::size_t(t)] = c;
        } catch (...) {
          // keep the earliest offender for a deterministic report
          if (i < fail_at[std::size_t(t)]) {
            fail_at[std::size_t(t)] = i;
            errors[std::size_t(t)] = std::current_exception();
          }
          return;
        }
      }
    };
    if (nthreads <= 1) {
      if (!elems.empty()) work(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(std::size_t(nthreads));
      for (int t = 0; t < nthreads; ++t) pool.emplace_back(work, t);
      for (auto& th : pool) th.join();
    }
    std::size_t worst = elems.size();
    int who = -1;
    for (int t = 0; t < nthreads; ++t)
      if (fail_at[std::size_t(t)] < worst) {
        worst = fail_at[std::size_t(t)];
        who = t;
      }
    if (who >= 0) std::rethrow_exception(errors[std::size_t(who)]);
    Rational m(0);
    for (int t = 0; t < nthreads; ++t) m = std::max(m, best[std::size_t(t)]);
    rows.emplace_back(r, m);
  }
  return rows;
}

FreenessWitness freeness_witness(const CFScheme& s, const GroupElement& g,
                                 std::int64_t l_max, int budget) {
  s.validate_structure();
  require_same_kind(s.group, g, "freeness_witness");
  if (g == s.group.identity())
    throw std::invalid_argument("freeness_witness: identity element");

  FreenessWitness w;
  w.g = g;
  const auto ord = order_of(s.group, g, 4096);
  w.torsion = ord.has_value();

  if (!w.torsion) {
    const CfSpace space(s);
    // the displacement condition quantifies over the proper levels n >= 1
    for (int n = 1; n < s.depth(); ++n) {
      const auto l = check_triangle(s, g, n, l_max);
      if (!l.has_value()) continue;
      const CompactOpen xn = space.full_level(n);
      const Rational c =
          space.correlation(power(s.group, g, *l), xn, xn, budget);
      if (!(c == Rational(0))) continue;  // displaced but re-entering: keep looking
      w.level = n;
      w.displacement = *l;
      w.correlation_value = c;
      return w;
    }
    throw SearchExhaustedError(
        "freeness_witness: no displaced level within the search bounds");
  }

  w.order = *ord;
  for (int n = 1; n <= s.depth(); ++n)
    if (left_translate(s.group, g, s.f_at(n)) == s.f_at(n))
      w.stabilized_levels.push_back(n);
  if (w.stabilized_levels.empty())
    throw SearchExhaustedError(
        "freeness_witness: no level is stabilized by the element");
  w.level = w.stabilized_levels.front();
  std::set<GroupElement> left;
  for (auto& e : s.f_at(w.level).elements(s.group, std::int64_t(1) << 20))
    left.insert(std::move(e));
  while (!left.empty()) {
    GroupElement start = *left.begin();
    std::vector<GroupElement> orbit;
    GroupElement x = start;
    do {
      left.erase(x);
      orbit.push_back(x);
      x = mul(s.group, g, x);
    } while (!(x == start));
    w.orbits.push_back(std::move(orbit));
  }
  return w;
}

}  // namespace cflab
