#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cflab/element_set.hpp"
#include "cflab/rational.hpp"
#include "cflab/scheme.hpp"

namespace cflab {

/// Union of same-level cylinders: the disjoint union of [f]_level over f in
/// names.  Cylinders at one level are pairwise disjoint, so the
/// representation is canonical once the level is fixed.
struct CompactOpen {
  int level = 0;
  FiniteSet names;

  friend bool operator==(const CompactOpen& a, const CompactOpen& b) {
    return a.level == b.level && a.names == b.names;
  }
};

/// Outcome of the partial action: the mapped part, normalized to one level,
/// and the part still undefined at the budget level.
struct ActResult {
  CompactOpen image;
  CompactOpen residual;
};

enum class BoolOp { Intersect, Union, Subtract };

/// Dichotomy record for the freeness of the action.  Exactly one branch is
/// populated: an infinite-order element displaces a full level off itself
/// (with the exact correlation, which must be zero); a torsion element
/// stabilizes levels, whose names split into orbits under it.
struct FreenessWitness {
  GroupElement g;
  bool torsion = false;
  int level = -1;
  // displacement branch
  std::int64_t displacement = 0;  // l with T_{g^l} X_level disjoint from X_level
  Rational correlation_value = Rational(0);
  // stabilizer branch
  std::int64_t order = 0;
  std::vector<int> stabilized_levels;
  std::vector<std::vector<GroupElement>> orbits;  // partition of F_level
};

/// The truncated (C,F)-space over a fixed scheme: cylinder algebra, the
/// exact invariant measure, and the partial action with level promotion.
/// Measures are exact rationals end-to-end.
class CfSpace {
 public:
  /// Requires F_n C_{n+1} contained in F_{n+1} at every level (cylinder
  /// children must live in the next shape); invalid_argument otherwise.
  explicit CfSpace(CFScheme scheme);

  const CFScheme& scheme() const { return s_; }
  int depth() const { return s_.depth(); }

  /// [name]_level as a one-name set; name must lie in F_level.
  CompactOpen cylinder(int level, const GroupElement& name) const;
  /// X_level: every level-`level` cylinder.
  CompactOpen full_level(int level) const;

  /// Names replaced by their level-m descendants f c_{level+1} ... c_m; the
  /// underlying set, and hence the measure, is unchanged.
  CompactOpen refine(const CompactOpen& a, int m) const;

  /// #names / (#C_1 ... #C_level), exact.
  Rational measure(const CompactOpen& a) const;

  /// Partial action T_g with promotion: a name f maps to g f when that stays
  /// inside the working shape; otherwise its cylinder is refined one level
  /// and retried, up to level `budget`.  The image collects the mapped
  /// cylinders at the deepest level used; the residual is what remains
  /// undefined there.  measure(image) + measure(residual) = measure(a).
  ActResult act(const GroupElement& g, const CompactOpen& a, int budget) const;

  /// Set algebra after refining both operands to a common level.
  CompactOpen boolean_op(BoolOp op, const CompactOpen& a,
                         const CompactOpen& b) const;

  /// Exact mu(T_g A intersect B).  The action on A must resolve within
  /// budget; UndefinedAtBudgetError otherwise.
  Rational correlation(const GroupElement& g, const CompactOpen& a,
                       const CompactOpen& b, int budget) const;

  /// Rows (r, max over the norm-r shell of correlation(g, a, b)).  The merge
  /// is a maximum, so any thread count gives identical output.
  std::vector<std::pair<std::int64_t, Rational>> decay_curve(
      const CompactOpen& a, const CompactOpen& b,
      std::span<const std::int64_t> radii, int budget, int threads = 1) const;

 private:
  void validate(const CompactOpen& a, const char* where) const;
  FiniteSet child_names(const FiniteSet& names, int level) const;

  CFScheme s_;
  std::vector<BigInt> denom_;  // denom_[n] = #C_1 ... #C_n
};

/// Searches the dichotomy witness: for infinite-order g, the first level
/// whose displaced copy has exact zero correlation with itself; for torsion
/// g, the stabilized levels and the orbit partition of the first one.
FreenessWitness freeness_witness(const CFScheme& s, const GroupElement& g,
                                 std::int64_t l_max, int budget);

}  // namespace cflab
