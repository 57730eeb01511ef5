#include <algorithm>
#include <map>
#include <set>

#include "cflab/errors.hpp"
#include "cflab/scheme.hpp"

namespace cflab {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b, r = a % b;
  return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  return -floor_div(-a, b);
}

/// Largest |coordinate| along one axis over the whole set.
std::int64_t axis_extent(const FiniteSet& s, int axis) {
  std::int64_t best = 0;
  const int arity = s.arity();
  for (const auto& r : s.runs()) {
    std::int64_t v = axis + 1 < arity
                         ? std::abs(r.prefix[std::size_t(axis)])
                         : std::max(std::abs(r.lo), std::abs(r.hi));
    best = std::max(best, v);
  }
  return best;
}

std::int64_t lattice_norm(const GroupDescriptor& d, const GroupElement& g) {
  return *norm_bounded(d, g);
}

/// Upper bound on the word norm of any element of a lattice set.
std::int64_t max_run_norm(const FiniteSet& s) {
  std::int64_t best = 0;
  const int arity = s.arity();
  for (const auto& r : s.runs()) {
    std::int64_t v = std::max(std::abs(r.lo), std::abs(r.hi));
    for (int i = 0; i + 1 < arity; ++i) v += std::abs(r.prefix[std::size_t(i)]);
    best = std::max(best, v);
  }
  return best;
}

bool is_central(const GroupElement& g) {
  return g.coords[0] == 0 && g.coords[1] == 0;
}

/// Incremental greedy state for copy-set selection: accepted elements, the
/// distinct difference values, and the deduplicated family of difference
/// sets {F d F^{-1}} whose pairwise disjointness — and disjointness from
/// F F^{-1} — defines acceptance.  Coinciding difference sets collapse (both
/// orderings of a pair give the same set in groups of exponent 2), but a
/// difference set is never collapsed against F F^{-1}: sharing the identity
/// with it is exactly how overlapping translates F c manifest, so that case
/// must stay a rejection.
struct CopyGreedy {
  const GroupDescriptor& d;
  const FiniteSet& f;
  FiniteSet finv;
  FiniteSet u0;
  std::vector<GroupElement> chosen;
  std::set<GroupElement> diff_values;
  std::vector<FiniteSet> family;  // difference sets only; u0 kept apart

  CopyGreedy(const GroupDescriptor& d_, const FiniteSet& f_)
      : d(d_), f(f_), finv(set_inverse(d_, f_)) {
    u0 = set_product(d, f, finv);
    chosen.push_back(d.identity());
  }

  FiniteSet member_for(const GroupElement& dd) const {
    if (d.kind() != GroupKind::DiscreteHeisenberg || is_central(dd))
      return left_translate(d, dd, u0);
    return set_product(d, right_translate(d, f, dd), finv);
  }

  /// Tests x against the family; on success returns the new member sets.
  bool test(const GroupElement& x, std::vector<FiniteSet>* news_out) const {
    std::vector<FiniteSet> news;
    for (const auto& s : chosen) {
      for (const GroupElement& dd :
           {mul(d, x, inv(d, s)), mul(d, s, inv(d, x))}) {
        if (dd == d.identity()) return false;  // duplicate of an accepted c
        FiniteSet m = member_for(dd);
        bool dup = false;
        for (const auto& fam : family)
          if (fam == m) {
            dup = true;
            break;
          }
        for (const auto& nw : news)
          if (!dup && nw == m) dup = true;
        if (dup) continue;
        news.push_back(std::move(m));
      }
    }
    for (std::size_t i = 0; i < news.size(); ++i) {
      if (news[i].intersects(u0)) return false;
      for (const auto& fam : family)
        if (news[i].intersects(fam)) return false;
      for (std::size_t j = i + 1; j < news.size(); ++j)
        if (news[i].intersects(news[j])) return false;
    }
    if (news_out) *news_out = std::move(news);
    return true;
  }

  void commit(const GroupElement& x, std::vector<FiniteSet> news) {
    for (const auto& s : chosen) {
      diff_values.insert(mul(d, x, inv(d, s)));
      diff_values.insert(mul(d, s, inv(d, x)));
    }
    for (auto& m : news) family.push_back(std::move(m));
    chosen.push_back(x);
  }
};

// ---------------------------------------------------------------- lattice --

/// Rows {x : 2x ∈ t} of a lattice set t, as runs.
void append_halved(const FiniteSet& t, std::vector<FiniteSet::Run>* acc) {
  const int arity = t.arity();
  for (const auto& r : t.runs()) {
    FiniteSet::Run h;
    bool ok = true;
    for (int i = 0; i + 1 < arity; ++i) {
      if (r.prefix[std::size_t(i)] % 2 != 0) {
        ok = false;
        break;
      }
      h.prefix[std::size_t(i)] = r.prefix[std::size_t(i)] / 2;
    }
    if (!ok) continue;
    h.lo = ceil_div(r.lo, 2);
    h.hi = floor_div(r.hi, 2);
    if (h.lo <= h.hi) acc->push_back(h);
  }
}

std::vector<GroupElement> select_copies_lattice(const GroupDescriptor& d,
                                                const FiniteSet& f,
                                                std::int64_t k) {
  CopyGreedy greedy(d, f);
  const FiniteSet w = set_product(d, greedy.u0, greedy.u0);
  const int arity = d.arity();

  while (std::int64_t(greedy.chosen.size()) < k) {
    // Region where a candidate would make two *distinct* family members
    // overlap.  Candidates outside are acceptable outright; candidates
    // inside fail except at the finitely many coincidence points where the
    // colliding members are actually the same set.
    std::vector<FiniteSet::Run> acc;
    std::vector<GroupElement> offsets;
    for (const auto& s : greedy.chosen) {
      offsets.push_back(s);
      for (const auto& dd : greedy.diff_values)
        offsets.push_back(mul(d, s, dd));
    }
    std::sort(offsets.begin(), offsets.end());
    offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
    for (const auto& off : offsets) {
      const FiniteSet t = left_translate(d, off, w);
      acc.insert(acc.end(), t.runs().begin(), t.runs().end());
    }
    for (const auto& s : greedy.chosen)
      for (const auto& s2 : greedy.chosen)
        append_halved(left_translate(d, mul(d, s, s2), w), &acc);
    const FiniteSet blocked = FiniteSet::from_runs(arity, std::move(acc));

    std::set<GroupElement> exempt;
    for (const auto& s : greedy.chosen)
      for (const auto& dd : greedy.diff_values) exempt.insert(mul(d, s, dd));
    for (const auto& s : greedy.chosen)
      for (const auto& s2 : greedy.chosen) {
        const GroupElement m = mul(d, s, s2);
        bool even = true;
        std::vector<std::int64_t> half(m.coords.size());
        for (std::size_t i = 0; i < m.coords.size(); ++i) {
          if (m.coords[i] % 2 != 0) {
            even = false;
            break;
          }
          half[i] = m.coords[i] / 2;
        }
        if (even) exempt.insert(d.element(half));
      }
    for (const auto& s : greedy.chosen) exempt.erase(s);

    std::vector<GroupElement> exempt_sorted(exempt.begin(), exempt.end());
    std::sort(exempt_sorted.begin(), exempt_sorted.end(),
              [&](const GroupElement& a, const GroupElement& b) {
                const auto na = lattice_norm(d, a), nb = lattice_norm(d, b);
                if (na != nb) return na < nb;
                return a < b;
              });

    const FiniteSet allowed =
        set_subtract(ball(d, max_run_norm(blocked) + 1), blocked);
    GroupElement best = min_norm_element(d, allowed);
    std::int64_t best_norm = lattice_norm(d, best);
    std::vector<FiniteSet> best_news;
    if (!greedy.test(best, &best_news))
      throw SearchExhaustedError(
          "copy selection: region candidate unexpectedly rejected");
    for (const auto& e : exempt_sorted) {
      const std::int64_t ne = lattice_norm(d, e);
      if (ne > best_norm || (ne == best_norm && !(e < best))) break;
      std::vector<FiniteSet> news;
      if (greedy.test(e, &news)) {
        best = e;
        best_norm = ne;
        best_news = std::move(news);
        break;  // exempt_sorted is in norm-lex order: first hit wins
      }
    }
    greedy.commit(best, std::move(best_news));
  }
  return greedy.chosen;
}

// ------------------------------------------------------------- heisenberg --

/// {m : z^m U ∩ U ≠ ∅}: the central-shift overlap profile of U, exact.
FiniteSet central_profile(const FiniteSet& u) {
  std::map<std::array<std::int64_t, 2>, std::vector<std::pair<std::int64_t, std::int64_t>>>
      lanes;
  for (const auto& r : u.runs()) lanes[r.prefix].emplace_back(r.lo, r.hi);
  std::vector<FiniteSet::Run> acc;
  for (const auto& [pre, ivs] : lanes)
    for (const auto& a : ivs)
      for (const auto& b : ivs) {
        FiniteSet::Run run;
        run.lo = a.first - b.second;
        run.hi = a.second - b.first;
        acc.push_back(run);
      }
  return FiniteSet::from_runs(1, std::move(acc));
}

std::vector<GroupElement> select_copies_heis(const GroupDescriptor& d,
                                             const FiniteSet& f,
                                             std::int64_t k) {
  const FiniteSet u0 = set_product(d, f, set_inverse(d, f));
  const FiniteSet v = central_profile(u0);
  const std::int64_t vmax = max_run_norm(v);
  const auto in_v = [&](std::int64_t t) {
    GroupElement e;
    e.coords = {t};
    return v.contains(e);
  };

  std::vector<std::int64_t> mv{0};
  std::set<std::int64_t> diffs;
  const std::int64_t scan_cap = (vmax + 1) * (k * k + 4) + 16;
  for (std::int64_t a = 1;
       std::int64_t(mv.size()) < k && a <= scan_cap; ++a) {
    for (const std::int64_t m : {-a, a}) {
      std::vector<std::int64_t> news;
      bool ok = true;
      for (const std::int64_t s : mv) {
        for (const std::int64_t t : {m - s, s - m}) {
          if (t == 0) ok = false;
          if (!ok) break;
          if (diffs.count(t) ||
              std::find(news.begin(), news.end(), t) != news.end())
            continue;  // same set as an existing member
          news.push_back(t);
        }
        if (!ok) break;
      }
      if (!ok) continue;
      for (std::size_t i = 0; i < news.size() && ok; ++i) {
        if (in_v(news[i])) ok = false;  // against F F^{-1} (shift 0)
        for (const std::int64_t b : diffs)
          if (ok && in_v(news[i] - b)) ok = false;
        for (std::size_t j = i + 1; j < news.size() && ok; ++j)
          if (in_v(news[i] - news[j])) ok = false;
      }
      if (!ok) continue;
      for (const std::int64_t t : news) diffs.insert(t);
      mv.push_back(m);
      break;
    }
  }
  if (std::int64_t(mv.size()) < k)
    throw SearchExhaustedError(
        "copy selection (heisenberg): no central candidate within scan bound");
  std::vector<GroupElement> out;
  for (const std::int64_t m : mv) out.push_back(d.element({0, 0, m}));
  return out;
}

// -------------------------------------------------------------- direct sum --

/// All elements of weight (word norm) in [1, max_weight], ordered by
/// (weight, mixed-radix code) — the canonical candidate order.
std::vector<GroupElement> dsum_candidates(const GroupDescriptor& d,
                                          int max_weight) {
  struct Cand {
    std::int64_t weight;
    std::int64_t code;
  };
  std::vector<Cand> cands;
  const int w = d.window();
  auto rec = [&](auto&& self, int place, std::int64_t weight,
                 std::int64_t code) -> void {
    if (weight > 0) cands.push_back({weight, code});
    if (place >= w) return;
    for (int i = place; i < w; ++i) {
      const std::int64_t m = d.order_at(i);
      for (std::int64_t r = 1; r < m; ++r) {
        const std::int64_t cost = std::min(r, m - r);
        if (weight + cost > max_weight) continue;
        self(self, i + 1, weight + cost, code + r * d.place(i));
      }
    }
  };
  rec(rec, 0, 0, 0);
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.weight != b.weight) return a.weight < b.weight;
    return a.code < b.code;
  });
  std::vector<GroupElement> out;
  out.reserve(cands.size());
  for (const auto& c : cands) out.push_back(d.element({c.code}));
  return out;
}

std::vector<GroupElement> select_copies_dsum(const GroupDescriptor& d,
                                             const FiniteSet& f,
                                             std::int64_t k) {
  CopyGreedy greedy(d, f);
  for (const auto& x : dsum_candidates(d, 4)) {
    if (std::int64_t(greedy.chosen.size()) >= k) break;
    std::vector<FiniteSet> news;
    if (greedy.test(x, &news)) greedy.commit(x, std::move(news));
  }
  if (std::int64_t(greedy.chosen.size()) < k)
    throw SearchExhaustedError(
        "copy selection (direct sum): candidates of weight <= 4 exhausted; "
        "a larger window is needed");
  return greedy.chosen;
}

// ------------------------------------------------------------ shape growth --

FiniteSet box_lattice(const GroupDescriptor& d,
                      const std::vector<std::int64_t>& e) {
  std::vector<FiniteSet::Run> runs;
  const int dim = d.lattice_dim();
  if (dim == 1) {
    runs.push_back({{0, 0}, -e[0], e[0]});
  } else if (dim == 2) {
    for (std::int64_t x = -e[0]; x <= e[0]; ++x)
      runs.push_back({{x, 0}, -e[1], e[1]});
  } else {
    for (std::int64_t x = -e[0]; x <= e[0]; ++x)
      for (std::int64_t y = -e[1]; y <= e[1]; ++y)
        runs.push_back({{x, y}, -e[2], e[2]});
  }
  return FiniteSet::from_runs(dim, std::move(runs));
}

FiniteSet box_heis(std::int64_t p, std::int64_t q, std::int64_t u) {
  std::vector<FiniteSet::Run> runs;
  for (std::int64_t a = -p; a <= p; ++a)
    for (std::int64_t b = -q; b <= q; ++b)
      runs.push_back({{a, b}, -u, u});
  return FiniteSet::from_runs(3, std::move(runs));
}

struct GrowContext {
  const GroupDescriptor& d;
  const std::vector<FiniteSet>& shapes;  // F_0..F_n
  const std::vector<FiniteSet>& copies;  // C_1..C_n
  const FiniteSet& new_copies;           // C_{n+1}
  const FiniteSet& folner_k;
  Rational eps;
  const std::vector<GroupElement>& displacement;
  const std::vector<GroupElement>& stabilizers;
  std::int64_t l_bound;
  BigInt denom_next;  // #C_1 ... #C_{n+1}
  Rational r_prev;
};

/// Verifies one candidate next shape against every per-level requirement.
/// Returns an empty string on success, else the failing requirement.
std::string verify_shape(const GrowContext& g, const FiniteSet& seed,
                         const FiniteSet& shape) {
  if (!seed.is_subset_of(shape)) return "containment";
  if (shape.cardinality() <= seed.cardinality()) return "properness";
  if (!(folner_defect(g.d, shape, g.folner_k) < g.eps)) return "folner";
  if (!(Rational(BigInt(shape.cardinality()), g.denom_next) > g.r_prev))
    return "growth";
  CFScheme tmp{g.d, g.shapes, g.copies};
  tmp.shapes.push_back(shape);
  tmp.copies.push_back(g.new_copies);
  const int level = int(g.shapes.size()) - 1;
  for (const auto& wit : g.displacement)
    if (!check_triangle(tmp, wit, level, g.l_bound).has_value())
      return "displacement witness " + to_string(wit);
  for (const auto& wit : g.stabilizers)
    if (!(left_translate(g.d, wit, shape) == shape))
      return "stabilizer witness " + to_string(wit);
  return "";
}

[[noreturn]] void growth_failed(int level, const std::string& why) {
  throw SearchExhaustedError("shape growth at level " + std::to_string(level) +
                             ": could not satisfy " + why +
                             " within the iteration bound");
}

FiniteSet grow_lattice(const GrowContext& g) {
  const FiniteSet& f = g.shapes.back();
  const int dim = g.d.lattice_dim();
  const FiniteSet seed = set_product(
      g.d, set_product(g.d, set_product(g.d, set_inverse(g.d, f), f), f),
      g.new_copies);
  const FiniteSet stack = set_product(g.d, f, g.new_copies);

  // Minimum per-axis extent from the Folner threshold: defect against a
  // generator is 2/(2E+1) for a box, so 2E+1 > 2/eps suffices per axis.
  const BigInt num = boost::multiprecision::numerator(g.eps);
  const BigInt den = boost::multiprecision::denominator(g.eps);
  const std::int64_t fol_min =
      ((BigInt(2) * den + num - 1) / num).convert_to<std::int64_t>();

  std::vector<std::int64_t> e(std::size_t(dim), 0);
  for (int i = 0; i < dim; ++i)
    e[std::size_t(i)] = std::max(axis_extent(seed, i), fol_min);
  for (const auto& wit : g.displacement) {
    std::int64_t l0 = -1;
    for (int a = 0; a < dim; ++a) {
      const std::int64_t ga = std::abs(wit.coords[std::size_t(a)]);
      if (ga == 0) continue;
      const std::int64_t cand = ceil_div(2 * axis_extent(stack, a) + 1, ga);
      if (l0 < 0 || cand < l0) l0 = cand;
    }
    if (l0 < 0) continue;  // identity witness is rejected later anyway
    for (int i = 0; i < dim; ++i)
      e[std::size_t(i)] =
          std::max(e[std::size_t(i)],
                   axis_extent(stack, i) +
                       l0 * std::abs(wit.coords[std::size_t(i)]));
  }

  std::string why;
  for (int iter = 0; iter < 60; ++iter) {
    const FiniteSet shape = box_lattice(g.d, e);
    why = verify_shape(g, seed, shape);
    if (why.empty()) return shape;
    for (auto& x : e) {
      if (x > (std::int64_t(1) << 50)) growth_failed(int(g.shapes.size()) - 1, why);
      x = 2 * x + 1;
    }
  }
  growth_failed(int(g.shapes.size()) - 1, why);
}

FiniteSet grow_heis(const GrowContext& g) {
  const FiniteSet& f = g.shapes.back();
  const FiniteSet finv = set_inverse(g.d, f);
  const FiniteSet fc = set_product(g.d, f, g.new_copies);
  // Folded left: intermediate (F^-1 F) F keeps run counts near the operand
  // sizes, unlike (F^-1 F)(F C) whose pair count explodes at depth >= 3.
  const FiniteSet seed = set_union(
      set_product(g.d, set_product(g.d, set_product(g.d, finv, f), f),
                  g.new_copies),
      set_product(g.d, set_product(g.d, set_product(g.d, f, finv), f),
                  g.new_copies));
  const FiniteSet& stack = fc;

  const BigInt num = boost::multiprecision::numerator(g.eps);
  const BigInt den = boost::multiprecision::denominator(g.eps);
  const std::int64_t fol_min =
      ((BigInt(4) * den + num - 1) / num).convert_to<std::int64_t>();

  const std::int64_t sa = axis_extent(stack, 0), sb = axis_extent(stack, 1),
                     sc = axis_extent(stack, 2);
  std::int64_t p = std::max(axis_extent(seed, 0), fol_min);
  std::int64_t q = std::max(axis_extent(seed, 1), fol_min);
  std::int64_t u = axis_extent(seed, 2);
  for (const auto& wit : g.displacement) {
    if (wit.coords[0] != 0) {  // x-direction: c-coordinate twists by l*b
      const std::int64_t l0 = ceil_div(2 * sa + 1, std::abs(wit.coords[0]));
      p = std::max(p, sa + l0 * std::abs(wit.coords[0]));
      u = std::max(u, sc + l0 * sb);
    } else if (wit.coords[1] != 0) {
      const std::int64_t l0 = ceil_div(2 * sb + 1, std::abs(wit.coords[1]));
      q = std::max(q, sb + l0 * std::abs(wit.coords[1]));
    } else if (wit.coords[2] != 0) {
      const std::int64_t l0 = ceil_div(2 * sc + 1, std::abs(wit.coords[2]));
      u = std::max(u, sc + l0 * std::abs(wit.coords[2]));
    }
  }
  // The x/y Folner defects couple the c-extent to the a/b extents.
  u = std::max(u, q * (2 * p + 1));

  std::string why;
  for (int iter = 0; iter < 60; ++iter) {
    const FiniteSet shape = box_heis(p, q, u);
    why = verify_shape(g, seed, shape);
    if (why.empty()) return shape;
    if (u > (std::int64_t(1) << 50))
      growth_failed(int(g.shapes.size()) - 1, why);
    if (why == "folner") {
      u = 2 * u + 1;  // c-extent dominates the box defect once p,q are preset
    } else {
      p = 2 * p + 1;
      q = 2 * q + 1;
      u = std::max(2 * u + 1, q * (2 * p + 1));
    }
  }
  growth_failed(int(g.shapes.size()) - 1, why);
}

FiniteSet grow_dsum(const GrowContext& g) {
  const FiniteSet& f = g.shapes.back();
  const FiniteSet seed = set_product(
      g.d, set_product(g.d, set_product(g.d, set_inverse(g.d, f), f), f),
      g.new_copies);
  int j = 0;
  const int w = g.d.window();
  while (j < w && std::int64_t(g.d.span_size(j)) <= max_run_norm(seed))
    ++j;
  // span_size(j) > max code in seed  <=>  seed ⊆ H_j (codes are < span size)
  auto span_set = [&](int digits) {
    std::vector<FiniteSet::Run> runs;
    runs.push_back({{0, 0}, 0, g.d.span_size(digits) - 1});
    return FiniteSet::from_runs(1, std::move(runs));
  };
  std::string why = "window too small";
  for (; j <= w; ++j) {
    const FiniteSet shape = span_set(j);
    why = verify_shape(g, seed, shape);
    if (why.empty()) return shape;
  }
  growth_failed(int(g.shapes.size()) - 1, why);
}

}  // namespace

BuildParams BuildParams::defaults(const GroupDescriptor& d, int depth) {
  BuildParams p;
  for (int n = 1; n <= depth; ++n) p.copy_sizes.push_back(n + 1);
  p.folner_eps.push_back(Rational(1));  // level 0, unused
  for (int n = 1; n <= depth; ++n)
    p.folner_eps.push_back(make_rational(1, n + 2));
  switch (d.kind()) {
    case GroupKind::IntegerLattice: {
      p.folner_test_set =
          FiniteSet::from_elements(d, d.symmetric_generators());
      const int dim = d.lattice_dim();
      if (dim == 1) {
        p.displacement_witnesses = {d.element({1}), d.element({2}),
                                    d.element({3})};
      } else if (dim == 2) {
        p.displacement_witnesses = {d.element({1, 0}), d.element({0, 1}),
                                    d.element({1, 1})};
      } else {
        p.displacement_witnesses = {d.element({1, 0, 0}), d.element({0, 1, 0}),
                                    d.element({0, 0, 1})};
      }
      break;
    }
    case GroupKind::DiscreteHeisenberg: {
      p.folner_test_set =
          FiniteSet::from_elements(d, d.symmetric_generators());
      p.displacement_witnesses = {d.element({1, 0, 0}), d.element({0, 1, 0}),
                                  d.element({0, 0, 1})};
      break;
    }
    case GroupKind::DirectSumCyclic: {
      if (d.window() < 3)
        throw std::invalid_argument(
            "build defaults: direct-sum window must be at least 3");
      p.folner_test_set = FiniteSet::single(d, d.element({1}));
      p.stabilizer_witnesses = {d.element({1}), d.element({d.place(1)}),
                                d.element({d.place(2)})};
      break;
    }
  }
  return p;
}

CFScheme build_scheme(const GroupDescriptor& d, int depth,
                      const BuildParams& params) {
  if (depth < 1) throw std::invalid_argument("build_scheme: depth must be >= 1");
  if (std::int64_t(params.copy_sizes.size()) != depth)
    throw std::invalid_argument(
        "build_scheme: need one target copy count per level");
  for (const std::int64_t k : params.copy_sizes)
    if (k < 2)
      throw std::invalid_argument("build_scheme: copy counts must be >= 2");
  // Thresholds may be given for levels 1..depth or 0..depth.
  std::vector<Rational> eps = params.folner_eps;
  if (std::int64_t(eps.size()) == depth)
    eps.insert(eps.begin(), Rational(1));
  if (std::int64_t(eps.size()) < depth + 1)
    throw std::invalid_argument(
        "build_scheme: need a Folner threshold for every level");
  for (int n = 1; n <= depth; ++n)
    if (!(eps[std::size_t(n)] > Rational(0)))
      throw std::invalid_argument(
          "build_scheme: Folner thresholds must be positive");
  if (!params.folner_test_set.has_value())
    throw std::invalid_argument("build_scheme: a Folner test set is required");
  for (const auto& g : params.displacement_witnesses)
    require_same_kind(d, g, "build_scheme displacement witness");
  for (const auto& g : params.stabilizer_witnesses)
    require_same_kind(d, g, "build_scheme stabilizer witness");

  CFScheme s{d, {}, {}};
  s.shapes.push_back(FiniteSet::single(d, d.identity()));

  BigInt denom = 1;
  Rational r_prev(1);
  for (int n = 0; n < depth; ++n) {
    const std::int64_t k = params.copy_sizes[std::size_t(n)];
    std::vector<GroupElement> chosen;
    switch (d.kind()) {
      case GroupKind::IntegerLattice:
        chosen = select_copies_lattice(d, s.shapes.back(), k);
        break;
      case GroupKind::DiscreteHeisenberg:
        chosen = select_copies_heis(d, s.shapes.back(), k);
        break;
      case GroupKind::DirectSumCyclic:
        chosen = select_copies_dsum(d, s.shapes.back(), k);
        break;
    }
    const FiniteSet copies = FiniteSet::from_elements(d, chosen);
    denom *= copies.cardinality();

    GrowContext ctx{d,
                    s.shapes,
                    s.copies,
                    copies,
                    *params.folner_test_set,
                    eps[std::size_t(n + 1)],
                    params.displacement_witnesses,
                    params.stabilizer_witnesses,
                    params.l_search_bound,
                    denom,
                    r_prev};
    FiniteSet next;
    switch (d.kind()) {
      case GroupKind::IntegerLattice:
        next = grow_lattice(ctx);
        break;
      case GroupKind::DiscreteHeisenberg:
        next = grow_heis(ctx);
        break;
      case GroupKind::DirectSumCyclic:
        next = grow_dsum(ctx);
        break;
    }
    r_prev = Rational(BigInt(next.cardinality()), denom);
    s.copies.push_back(copies);
    s.shapes.push_back(std::move(next));
  }
  s.validate_structure();
  return s;
}

std::int64_t exhaustion_radius(const CFScheme& s, std::int64_t cap) {
  s.validate_structure();
  const FiniteSet& top = s.shapes.back();
  std::int64_t r = 0;
  while (r + 1 <= cap && ball(s.group, r + 1).is_subset_of(top)) ++r;
  return r;
}

}  // namespace cflab
