#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cflab/element_set.hpp"
#include "cflab/group.hpp"
#include "cflab/rational.hpp"

namespace cflab {

using Json = nlohmann::ordered_json;

/// A finite-depth (C,F)-scheme: shape sets F_0..F_N and copy sets C_1..C_N.
/// Construction validates structure only (matching kinds/arity); the
/// semantic conditions live in the checkers so that defective schemes can be
/// represented, checked, and reported.
struct CFScheme {
  GroupDescriptor group;
  std::vector<FiniteSet> shapes;  // F_0..F_N
  std::vector<FiniteSet> copies;  // C_1..C_N stored at indices 0..N-1

  int depth() const { return static_cast<int>(shapes.size()) - 1; }
  const FiniteSet& f_at(int n) const;
  const FiniteSet& c_at(int n) const;  // n in [1, depth]
  void validate_structure() const;     // throws on shape/kind inconsistencies
};

/// One verdict row of a condition report.
struct CheckItem {
  int level = 0;
  std::string item;
  bool pass = false;
  Json witness;  // counterexample data or confirming detail
};

/// Deterministic, serializable outcome of one checker run.
struct ConditionReport {
  std::string condition;
  Json params;
  std::vector<CheckItem> items;
  Json extras;

  bool passed() const;
  Json to_json() const;
};

/// Defining conditions at every level: F_0 = {identity}, identity in F_n,
/// #C_{n+1} >= 2, F_n^{-1} F_n F_n C_{n+1} properly inside F_{n+1}, and the
/// translates {F_n c} pairwise disjoint.  Also reports the growth sequence
/// r_n = #F_n / (#C_1...#C_n) and whether it increases strictly.
ConditionReport check_base(const CFScheme& s);

/// Per-level Folner defect of F_n against the test set K, with the pass
/// threshold eps_by_level[n] (levels 1..depth; level 0 is the forced
/// singleton and is reported in extras only).
ConditionReport check_folner_schedule(const CFScheme& s, const FiniteSet& k,
                                      const std::vector<Rational>& eps_by_level);
ConditionReport check_folner(const CFScheme& s, const FiniteSet& k,
                             const Rational& eps);

/// Displacement condition for an infinite-order g at level n: the smallest
/// l in [1, l_max] with g^l (F_n C_{n+1}) inside F_{n+1} minus F_n C_{n+1}.
/// Throws WrongDichotomyError when g is torsion (or the identity).
std::optional<std::int64_t> check_triangle(const CFScheme& s,
                                           const GroupElement& g, int n,
                                           std::int64_t l_max);

/// Stabilizer condition for a torsion g: levels with g F_n = F_n.
/// Throws WrongDichotomyError when g has infinite order.
ConditionReport check_square(const CFScheme& s, const GroupElement& g,
                             std::int64_t order_bound = 1 << 20);

/// Mixing-grade conditions: (i) F_n F_n^{-1} F_n C_{n+1} inside F_{n+1};
/// (ii) the sets F_n c1 c2^{-1} F_n^{-1} (c1 != c2) and F_n F_n^{-1}
/// pairwise disjoint; (iii) #C_n strictly increasing across levels (the
/// finite-depth surrogate of #C_n -> infinity).
ConditionReport check_mixing(const CFScheme& s);

struct BuildParams {
  /// Target #C_n per level (size depth); defaults to 2,3,...,depth+1.
  std::vector<std::int64_t> copy_sizes;
  /// Folner threshold per level 1..depth; defaults to 1/(n+2).
  std::vector<Rational> folner_eps;
  /// Folner test set; defaults per kind (symmetric generators; {e_0} for
  /// direct sums, whose span-type Folner sets cannot absorb the full
  /// generator window at finite depth).
  std::optional<FiniteSet> folner_test_set;
  /// Infinite-order elements the displacement condition must witness at
  /// every constructed level (defaults per kind; must be empty for torsion
  /// kinds).
  std::vector<GroupElement> displacement_witnesses;
  /// Torsion elements every level must stabilize (direct sums only).
  std::vector<GroupElement> stabilizer_witnesses;
  /// Displacement search cap.  Sparse copy sets force g^l to clear the whole
  /// stacked region (translates cannot interleave it), so workable l grow
  /// with the top-shape diameter; the default accommodates depth-5 builds.
  std::int64_t l_search_bound = 10'000'000;

  static BuildParams defaults(const GroupDescriptor& d, int depth);
};

/// Deterministic construction of a depth-N scheme satisfying every checker
/// above.  Throws SearchExhaustedError with level context when a bounded
/// growth loop fails.
CFScheme build_scheme(const GroupDescriptor& d, int depth,
                      const BuildParams& params);

/// Largest r <= cap with ball(r) contained in the top shape: the radius up
/// to which the nested shapes exhaust the group (the partial action resolves
/// any g inside it given full budget).
std::int64_t exhaustion_radius(const CFScheme& s, std::int64_t cap = 64);

Json element_to_json(const GroupDescriptor& d, const GroupElement& g);
Json set_to_json_brief(const GroupDescriptor& d, const FiniteSet& s,
                       std::int64_t cap = 16);

}  // namespace cflab
