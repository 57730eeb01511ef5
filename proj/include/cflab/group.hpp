#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cflab/errors.hpp"

namespace cflab {

enum class GroupKind { IntegerLattice, DirectSumCyclic, DiscreteHeisenberg };

std::string to_string(GroupKind kind);

/// One element of a concrete group, in canonical coordinates:
///   integer-lattice(d)        -> the d coordinates
///   discrete-heisenberg       -> (a, b, c)
///   direct-sum-finite-cyclic  -> a single mixed-radix code over the window
/// Elements carry their kind so cross-group mixing is detected early.
struct GroupElement {
  GroupKind kind = GroupKind::IntegerLattice;
  std::vector<std::int64_t> coords;

  bool operator==(const GroupElement&) const = default;
  /// Lexicographic order on (kind, coords); used for deterministic maps.
  bool operator<(const GroupElement& o) const {
    if (kind != o.kind) return kind < o.kind;
    return coords < o.coords;
  }
};

std::string to_string(const GroupElement& g);

/// Immutable description of a supported group.  Cheap to copy (shared
/// internals); equality is structural.
class GroupDescriptor {
 public:
  /// Z^d with generators e_1..e_d; supported d: 1..3.
  static GroupDescriptor integer_lattice(int dim);

  /// Countable direct sum of cyclic groups; `orders` cycles over the index
  /// line, and `window` bounds the representable support [0, window).
  /// Generators are e_0..e_{window-1}.
  static GroupDescriptor direct_sum_cyclic(std::vector<std::int64_t> orders,
                                           int window = 16);

  /// Integer Heisenberg group: (a,b,c)*(a',b',c') = (a+a', b+b', c+c'+a*b'),
  /// generators x=(1,0,0), y=(0,1,0).
  static GroupDescriptor discrete_heisenberg();

  GroupKind kind() const;
  /// Number of canonical coordinates per element (lattice: d, heisenberg: 3,
  /// direct sum: 1).
  int arity() const;
  int lattice_dim() const;
  int window() const;
  /// The order pattern as given at construction (cycled over the index
  /// line); the serialization form.
  const std::vector<std::int64_t>& cyclic_orders() const;
  std::int64_t order_at(int index) const;
  /// Mixed-radix place value of digit `index` (place(0) = 1).
  std::int64_t place(int index) const;
  /// Product of the first `digits` orders == size of span(e_0..e_{digits-1}).
  std::int64_t span_size(int digits) const;

  const std::vector<GroupElement>& generators() const;
  /// Generators together with their inverses, deduplicated, sorted.
  const std::vector<GroupElement>& symmetric_generators() const;
  GroupElement identity() const;

  /// Builds an element after validating coordinate shape (and, for direct
  /// sums, that the code is within the window capacity).
  GroupElement element(std::vector<std::int64_t> coords) const;

  /// Direct sums only: element from sorted (index, residue) support pairs.
  GroupElement dsum_from_pairs(
      const std::vector<std::pair<int, std::int64_t>>& pairs) const;
  std::vector<std::pair<int, std::int64_t>> dsum_pairs(
      const GroupElement& g) const;

  bool operator==(const GroupDescriptor& o) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  explicit GroupDescriptor(std::shared_ptr<const Impl> impl);
};

GroupElement mul(const GroupDescriptor& d, const GroupElement& a,
                 const GroupElement& b);
GroupElement inv(const GroupDescriptor& d, const GroupElement& a);
/// a^n for any integer n (negative powers via the inverse).
GroupElement power(const GroupDescriptor& d, const GroupElement& a,
                   std::int64_t n);

/// Order of g if it is <= bound, otherwise nullopt ("exceeds bound").
std::optional<std::int64_t> order_of(const GroupDescriptor& d,
                                     const GroupElement& g,
                                     std::int64_t bound);

/// True for kinds whose non-identity elements are all torsion.
bool torsion_kind(GroupKind kind);

/// Word-length norm w.r.t. the declared generators.  Closed form for lattice
/// and direct-sum kinds; Heisenberg uses breadth-first Cayley-graph distance
/// and reports nullopt beyond `heis_cap`.
std::optional<std::int64_t> norm_bounded(const GroupDescriptor& d,
                                         const GroupElement& g,
                                         std::int64_t heis_cap = 24);

void require_same_kind(const GroupDescriptor& d, const GroupElement& g,
                       const char* who);

}  // namespace cflab
