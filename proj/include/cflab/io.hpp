#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cflab/cfspace.hpp"
#include "cflab/entropy.hpp"
#include "cflab/scheme.hpp"
#include "cflab/suspension.hpp"

namespace cflab {

/// {"kind": "...", "params": {...}}
Json group_to_json(const GroupDescriptor& d);
GroupDescriptor group_from_json(const Json& j);

/// Inverse of element_to_json: integer arrays for lattice/Heisenberg
/// coordinates, index-residue pair lists for direct sums.  `where` names
/// the field in parse errors.
GroupElement element_from_json(const GroupDescriptor& d, const Json& j,
                               const std::string& where);

/// Small sets serialize as explicit element arrays; sets above
/// `explicit_cap` elements as {"runs": [[prefix..., lo, hi]...]} in
/// canonical run order.  Loading accepts both forms.
Json set_to_json(const GroupDescriptor& d, const FiniteSet& s,
                 std::int64_t explicit_cap = 4096);
FiniteSet set_from_json(const GroupDescriptor& d, const Json& j,
                        const std::string& where);

/// Scheme file: {"group": ..., "F": [set...], "C": [set...]}.  Loading
/// deduplicates set elements; `warnings` (if given) collects one note per
/// deduplicated field.
Json scheme_to_json(const CFScheme& s);
CFScheme scheme_from_json(const Json& j,
                          std::vector<std::string>* warnings = nullptr);
void save_scheme(const CFScheme& s, const std::string& path);
CFScheme load_scheme(const std::string& path,
                     std::vector<std::string>* warnings = nullptr);

/// {"level": m, "names": [element...]}
Json compact_open_to_json(const GroupDescriptor& d, const CompactOpen& a);
CompactOpen compact_open_from_json(const GroupDescriptor& d, const Json& j,
                                   const std::string& where);

/// {"resolution": M, "seed": s, "region": {...}, "counts": [[name, k]...]}
/// with counts in canonical element order.
Json sample_to_json(const GroupDescriptor& d, const PoissonSample& x);
PoissonSample sample_from_json(const GroupDescriptor& d, const Json& j);

/// Shortest representation that round-trips a double exactly (%.17g).
std::string format_double(double v);

/// CSV emitters.  Exact rationals travel as separate numerator and
/// denominator columns; only entropy values and Monte-Carlo statistics are
/// floating point.
std::string decay_csv(
    const std::vector<std::pair<std::int64_t, Rational>>& rows);
std::string entropy_csv(const EntropyCurve& curve);

struct CovarianceRow {
  std::int64_t g_norm = 0;
  Rational exact;
  double mc_estimate = 0.0;
  double mc_stderr = 0.0;
};
std::string covariance_csv(const std::vector<CovarianceRow>& rows);

Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace cflab
