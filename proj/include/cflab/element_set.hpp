#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cflab/group.hpp"
#include "cflab/rational.hpp"

namespace cflab {

/// Deduplicated finite subset of a group.
///
/// Internally a sorted list of disjoint runs: all coordinates but the last
/// are fixed per run ("prefix"), the last coordinate ranges over [lo, hi].
/// This keeps the big product sets of deep schemes (1e7..5e8 elements)
/// representable in a few thousand runs while every operation stays exact.
/// Direct-sum elements are single mixed-radix codes, so their runs are plain
/// integer intervals.
class FiniteSet {
 public:
  struct Run {
    std::array<std::int64_t, 2> prefix{0, 0};
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    bool operator==(const Run&) const = default;
  };

  FiniteSet() = default;
  explicit FiniteSet(int arity) : arity_(arity) {}

  static FiniteSet empty_set(const GroupDescriptor& d);
  static FiniteSet single(const GroupDescriptor& d, const GroupElement& g);
  static FiniteSet from_elements(const GroupDescriptor& d,
                                 std::span<const GroupElement> elems);
  static FiniteSet from_elements(const GroupDescriptor& d,
                                 const std::vector<GroupElement>& elems);
  /// Takes arbitrary (possibly overlapping, unsorted) runs and normalizes.
  static FiniteSet from_runs(int arity, std::vector<Run> runs);

  int arity() const { return arity_; }
  std::int64_t cardinality() const { return card_; }
  bool empty() const { return runs_.empty(); }
  const std::vector<Run>& runs() const { return runs_; }

  bool contains(const GroupElement& g) const;
  /// Element at position `idx` in canonical (prefix, last) order.
  GroupElement element_at(const GroupDescriptor& d, std::int64_t idx) const;
  /// Materializes all elements; throws std::length_error above `cap`.
  std::vector<GroupElement> elements(const GroupDescriptor& d,
                                     std::int64_t cap = 1 << 22) const;

  bool is_subset_of(const FiniteSet& other) const;
  bool intersects(const FiniteSet& other) const;
  bool operator==(const FiniteSet&) const = default;

  friend FiniteSet set_union(const FiniteSet& a, const FiniteSet& b);
  friend FiniteSet set_intersect(const FiniteSet& a, const FiniteSet& b);
  friend FiniteSet set_subtract(const FiniteSet& a, const FiniteSet& b);

 private:
  int arity_ = 1;
  std::vector<Run> runs_;
  std::int64_t card_ = 0;

  void normalize();
  friend class SetProductAccumulator;
};

/// {a*b : a in A, b in B}, deduplicated.  Output-sensitive via run algebra.
FiniteSet set_product(const GroupDescriptor& d, const FiniteSet& a,
                      const FiniteSet& b);
/// {a^{-1} : a in A}.
FiniteSet set_inverse(const GroupDescriptor& d, const FiniteSet& a);
/// {g*a : a in A}.
FiniteSet left_translate(const GroupDescriptor& d, const GroupElement& g,
                         const FiniteSet& a);
/// {a*g : a in A}.
FiniteSet right_translate(const GroupDescriptor& d, const FiniteSet& a,
                          const GroupElement& g);

/// Whether (g*A) meets B, without materializing the translate.  Left
/// translation preserves run order for lattice and Heisenberg groups, so
/// both predicates walk A's runs with transformed keys in O(runs) and no
/// allocation; other kinds fall back to the materializing path.
bool translated_intersects(const GroupDescriptor& d, const GroupElement& g,
                           const FiniteSet& a, const FiniteSet& b);
/// Whether (g*A) is contained in B; same evaluation strategy.
bool translated_subset(const GroupDescriptor& d, const GroupElement& g,
                       const FiniteSet& a, const FiniteSet& b);

/// max over g in K of #(gF symmetric-difference F) / #F; in [0, 2].
/// Preconditions: F nonempty (domain error otherwise).
Rational folner_defect(const GroupDescriptor& d, const FiniteSet& f,
                       const FiniteSet& k);

/// Elements of word-length norm exactly r (may be empty for direct sums).
FiniteSet shell(const GroupDescriptor& d, std::int64_t r);
/// Elements of norm <= r.
FiniteSet ball(const GroupDescriptor& d, std::int64_t r);

/// Smallest norm element of `allowed` (ties broken lexicographically).
/// Lattice kinds only; used by the scheme builder.
GroupElement min_norm_element(const GroupDescriptor& d,
                              const FiniteSet& allowed);

}  // namespace cflab
