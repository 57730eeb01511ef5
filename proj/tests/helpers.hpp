#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "cflab/element_set.hpp"
#include "cflab/group.hpp"
#include "cflab/scheme.hpp"

namespace cflab::testutil {

// Depth-2 scheme over Z used as a hand-checkable fixture throughout the
// tests: F_0 = {0}, C_1 = {0,3}, F_1 = [-1..8], C_2 = {0,30}, F_2 = [-20..120].
inline CFScheme tiny_z_scheme() {
  const GroupDescriptor d = GroupDescriptor::integer_lattice(1);
  CFScheme s{d, {}, {}};
  s.shapes.push_back(FiniteSet::single(d, d.identity()));
  s.copies.push_back(
      FiniteSet::from_elements(d, {d.element({0}), d.element({3})}));
  s.shapes.push_back(FiniteSet::from_runs(1, {{{0, 0}, -1, 8}}));
  s.copies.push_back(
      FiniteSet::from_elements(d, {d.element({0}), d.element({30})}));
  s.shapes.push_back(FiniteSet::from_runs(1, {{{0, 0}, -20, 120}}));
  s.validate_structure();
  return s;
}

inline FiniteSet interval_z(const GroupDescriptor& d, std::int64_t lo,
                            std::int64_t hi) {
  (void)d;
  return FiniteSet::from_runs(1, {{{0, 0}, lo, hi}});
}

// Depth-2 scheme over (Z/2)^5 with span shapes: F_1 = [0..3] (two digits),
// F_2 = [0..15] (four digits); copies C_1 = {0, e_0}, C_2 = {0, e_2}.
inline CFScheme tiny_dsum_scheme() {
  const GroupDescriptor d = GroupDescriptor::direct_sum_cyclic({2}, 5);
  CFScheme s{d, {}, {}};
  s.shapes.push_back(FiniteSet::single(d, d.identity()));
  s.copies.push_back(
      FiniteSet::from_elements(d, {d.element({0}), d.element({1})}));
  s.shapes.push_back(FiniteSet::from_runs(1, {{{0, 0}, 0, 3}}));
  s.copies.push_back(
      FiniteSet::from_elements(d, {d.element({0}), d.element({4})}));
  s.shapes.push_back(FiniteSet::from_runs(1, {{{0, 0}, 0, 15}}));
  s.validate_structure();
  return s;
}

// Reference implementations on plain element sets, for differential testing
// of the run-based algebra.
using NaiveSet = std::set<GroupElement>;

inline NaiveSet to_naive(const GroupDescriptor& d, const FiniteSet& s) {
  NaiveSet out;
  for (const auto& g : s.elements(d)) out.insert(g);
  return out;
}

inline FiniteSet from_naive(const GroupDescriptor& d, const NaiveSet& s) {
  return FiniteSet::from_elements(
      d, std::vector<GroupElement>(s.begin(), s.end()));
}

inline NaiveSet naive_product(const GroupDescriptor& d, const NaiveSet& a,
                              const NaiveSet& b) {
  NaiveSet out;
  for (const auto& x : a)
    for (const auto& y : b) out.insert(mul(d, x, y));
  return out;
}

inline NaiveSet naive_inverse(const GroupDescriptor& d, const NaiveSet& a) {
  NaiveSet out;
  for (const auto& x : a) out.insert(inv(d, x));
  return out;
}

// Uniform random element with coordinates in a small box, per kind.
inline GroupElement random_element(const GroupDescriptor& d,
                                   std::mt19937_64& rng, std::int64_t span) {
  switch (d.kind()) {
    case GroupKind::IntegerLattice: {
      std::uniform_int_distribution<std::int64_t> u(-span, span);
      std::vector<std::int64_t> c(std::size_t(d.lattice_dim()));
      for (auto& v : c) v = u(rng);
      return d.element(c);
    }
    case GroupKind::DiscreteHeisenberg: {
      std::uniform_int_distribution<std::int64_t> u(-span, span);
      return d.element({u(rng), u(rng), u(rng)});
    }
    case GroupKind::DirectSumCyclic: {
      std::uniform_int_distribution<std::int64_t> u(
          0, std::min<std::int64_t>(d.span_size(d.window()) - 1,
                                    4 * span + 8));
      return d.element({u(rng)});
    }
  }
  return d.identity();
}

inline FiniteSet random_set(const GroupDescriptor& d, std::mt19937_64& rng,
                            std::int64_t span, int count) {
  std::vector<GroupElement> elems;
  elems.reserve(std::size_t(count));
  for (int i = 0; i < count; ++i)
    elems.push_back(random_element(d, rng, span));
  return FiniteSet::from_elements(d, elems);
}

// Nonempty random subset by a fair coin per element.
inline FiniteSet random_subset_of(const FiniteSet& s, std::mt19937_64& rng,
                                  const GroupDescriptor& d) {
  const auto elems = s.elements(d, 1 << 16);
  std::vector<GroupElement> keep;
  std::uniform_int_distribution<int> coin(0, 1);
  for (const auto& e : elems)
    if (coin(rng)) keep.push_back(e);
  if (keep.empty() && !elems.empty()) keep.push_back(elems.front());
  return FiniteSet::from_elements(d, keep);
}

}  // namespace cflab::testutil
