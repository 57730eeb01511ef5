#include "cflab/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cflab {
namespace {

std::int64_t int_field(const Json& j, const char* key,
                       const std::string& where) {
  if (!j.is_object() || !j.contains(key) ||
      !j.at(key).is_number_integer())
    throw ParseError(where, std::string("missing integer field '") + key +
                                "'");
  return j.at(key).get<std::int64_t>();
}

std::vector<std::int64_t> int_array(const Json& j, const std::string& where) {
  if (!j.is_array())
    throw ParseError(where, "expected an array of integers");
  std::vector<std::int64_t> out;
  for (const Json& v : j) {
    if (!v.is_number_integer())
      throw ParseError(where, "expected an array of integers");
    out.push_back(v.get<std::int64_t>());
  }
  return out;
}

}  // namespace

Json group_to_json(const GroupDescriptor& d) {
  Json j;
  switch (d.kind()) {
    case GroupKind::IntegerLattice:
      j["kind"] = "integer-lattice";
      j["params"] = Json{{"dim", d.lattice_dim()}};
      break;
    case GroupKind::DirectSumCyclic: {
      Json orders = Json::array();
      for (std::int64_t m : d.cyclic_orders()) orders.push_back(m);
      j["kind"] = "direct-sum-finite-cyclic";
      j["params"] = Json{{"orders", orders}, {"window", d.window()}};
      break;
    }
    case GroupKind::DiscreteHeisenberg:
      j["kind"] = "discrete-heisenberg";
      j["params"] = Json::object();
      break;
  }
  return j;
}

GroupDescriptor group_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ParseError("group.kind", "missing group kind");
  const std::string kind = j.at("kind").get<std::string>();
  const Json params = j.contains("params") ? j.at("params") : Json::object();
  try {
    if (kind == "integer-lattice")
      return GroupDescriptor::integer_lattice(
          int(int_field(params, "dim", "group.params")));
    if (kind == "direct-sum-finite-cyclic") {
      if (!params.contains("orders"))
        throw ParseError("group.params.orders", "missing cyclic orders");
      auto orders = int_array(params.at("orders"), "group.params.orders");
      int window = 16;
      if (params.contains("window"))
        window = int(int_field(params, "window", "group.params"));
      return GroupDescriptor::direct_sum_cyclic(std::move(orders), window);
    }
    if (kind == "discrete-heisenberg")
      return GroupDescriptor::discrete_heisenberg();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError("group.params", e.what());
  }
  throw ParseError("group.kind", "unknown group kind '" + kind + "'");
}

GroupElement element_from_json(const GroupDescriptor& d, const Json& j,
                               const std::string& where) {
  try {
    if (d.kind() == GroupKind::DirectSumCyclic) {
      if (!j.is_array())
        throw ParseError(where, "expected a list of [index, residue] pairs");
      std::vector<std::pair<int, std::int64_t>> pairs;
      for (const Json& p : j) {
        if (!p.is_array() || p.size() != 2 ||
            !p.at(0).is_number_integer() || !p.at(1).is_number_integer())
          throw ParseError(where, "expected a list of [index, residue] pairs");
        const int idx = p.at(0).get<int>();
        const std::int64_t res = p.at(1).get<std::int64_t>();
        // dsum_from_pairs reduces residues mod the order; a file with an
        // out-of-range residue is malformed, so reject before constructing
        if (idx >= 0 && idx < d.window()) {
          const std::int64_t m = d.order_at(idx);
          if (res < 0 || res >= m)
            throw ParseError(where, "residue " + std::to_string(res) +
                                        " outside [0," + std::to_string(m) +
                                        ") at index " + std::to_string(idx));
        }
        pairs.emplace_back(idx, res);
      }
      return d.dsum_from_pairs(pairs);
    }
    return d.element(int_array(j, where));
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(where, e.what());
  }
}

Json set_to_json(const GroupDescriptor& d, const FiniteSet& s,
                 std::int64_t explicit_cap) {
  if (s.cardinality() <= explicit_cap) {
    Json arr = Json::array();
    for (std::int64_t i = 0; i < s.cardinality(); ++i)
      arr.push_back(element_to_json(d, s.element_at(d, i)));
    return arr;
  }
  Json runs = Json::array();
  for (const FiniteSet::Run& r : s.runs()) {
    Json row = Json::array();
    for (int i = 0; i + 1 < s.arity(); ++i) row.push_back(r.prefix[i]);
    row.push_back(r.lo);
    row.push_back(r.hi);
    runs.push_back(std::move(row));
  }
  return Json{{"runs", std::move(runs)}};
}

FiniteSet set_from_json(const GroupDescriptor& d, const Json& j,
                        const std::string& where) {
  if (j.is_object() && j.contains("runs")) {
    const Json& rows = j.at("runs");
    if (!rows.is_array()) throw ParseError(where, "'runs' must be an array");
    std::vector<FiniteSet::Run> runs;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto vals =
          int_array(rows[i], where + ".runs[" + std::to_string(i) + "]");
      if (int(vals.size()) != d.arity() + 1)
        throw ParseError(where + ".runs[" + std::to_string(i) + "]",
                         "expected [prefix..., lo, hi] with " +
                             std::to_string(d.arity() + 1) + " entries");
      FiniteSet::Run r;
      for (int k = 0; k + 1 < d.arity(); ++k) r.prefix[std::size_t(k)] = vals[std::size_t(k)];
      r.lo = vals[std::size_t(d.arity() - 1)];
      r.hi = vals[std::size_t(d.arity())];
      if (r.lo > r.hi)
        throw ParseError(where + ".runs[" + std::to_string(i) + "]",
                         "run with lo > hi");
      runs.push_back(r);
    }
    FiniteSet out = FiniteSet::from_runs(d.arity(), std::move(runs));
    // re-validate the canonical extremes through the checking element
    // constructor (the pair round-trip would silently truncate overlong
    // direct-sum codes, so go through raw coordinates)
    if (!out.empty()) {
      try {
        d.element(out.element_at(d, 0).coords);
        d.element(out.element_at(d, out.cardinality() - 1).coords);
      } catch (const std::exception& e) {
        throw ParseError(where, e.what());
      }
    }
    return out;
  }
  if (!j.is_array()) throw ParseError(where, "expected element array or runs");
  std::vector<GroupElement> elems;
  for (std::size_t i = 0; i < j.size(); ++i)
    elems.push_back(
        element_from_json(d, j[i], where + "[" + std::to_string(i) + "]"));
  return FiniteSet::from_elements(d, elems);
}

Json scheme_to_json(const CFScheme& s) {
  Json j;
  j["group"] = group_to_json(s.group);
  Json f = Json::array();
  for (const FiniteSet& fs : s.shapes) f.push_back(set_to_json(s.group, fs));
  Json c = Json::array();
  for (const FiniteSet& cs : s.copies) c.push_back(set_to_json(s.group, cs));
  j["F"] = std::move(f);
  j["C"] = std::move(c);
  return j;
}

CFScheme scheme_from_json(const Json& j, std::vector<std::string>* warnings) {
  if (!j.is_object()) throw ParseError("scheme", "expected an object");
  if (!j.contains("group")) throw ParseError("group", "missing group");
  CFScheme s{group_from_json(j.at("group")), {}, {}};
  auto load_sets = [&](const char* key, std::vector<FiniteSet>& out) {
    if (!j.contains(key) || !j.at(key).is_array())
      throw ParseError(key, "missing set list");
    const Json& rows = j.at(key);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      // C sets are conventionally numbered from 1
      const std::string where =
          std::string(key) + "[" +
          std::to_string(key[0] == 'C' ? i + 1 : i) + "]";
      FiniteSet fs = set_from_json(s.group, rows[i], where);
      if (rows[i].is_array() &&
          std::int64_t(rows[i].size()) != fs.cardinality() && warnings)
        warnings->push_back(
            where + ": " +
            std::to_string(std::int64_t(rows[i].size()) - fs.cardinality()) +
            " duplicate element(s) removed");
      out.push_back(std::move(fs));
    }
  };
  load_sets("F", s.shapes);
  load_sets("C", s.copies);
  try {
    s.validate_structure();
  } catch (const std::exception& e) {
    throw ParseError("scheme", e.what());
  }
  return s;
}

void save_scheme(const CFScheme& s, const std::string& path) {
  write_text_file(path, scheme_to_json(s).dump(2) + "\n");
}

CFScheme load_scheme(const std::string& path,
                     std::vector<std::string>* warnings) {
  return scheme_from_json(load_json_file(path), warnings);
}

Json compact_open_to_json(const GroupDescriptor& d, const CompactOpen& a) {
  Json j;
  j["level"] = a.level;
  j["names"] = set_to_json(d, a.names);
  return j;
}

CompactOpen compact_open_from_json(const GroupDescriptor& d, const Json& j,
                                   const std::string& where) {
  CompactOpen a;
  a.level = int(int_field(j, "level", where));
  if (!j.contains("names")) throw ParseError(where, "missing 'names'");
  a.names = set_from_json(d, j.at("names"), where + ".names");
  return a;
}

Json sample_to_json(const GroupDescriptor& d, const PoissonSample& x) {
  Json j;
  j["resolution"] = x.resolution;
  j["seed"] = x.seed;
  j["region"] = compact_open_to_json(d, x.region);
  Json counts = Json::array();
  for (const auto& [name, k] : x.counts)
    counts.push_back(Json::array({element_to_json(d, name), k}));
  j["counts"] = std::move(counts);
  return j;
}

PoissonSample sample_from_json(const GroupDescriptor& d, const Json& j) {
  PoissonSample x;
  x.resolution = int(int_field(j, "resolution", "sample"));
  if (!j.contains("seed") || !j.at("seed").is_number())
    throw ParseError("sample.seed", "missing seed");
  x.seed = j.at("seed").get<std::uint64_t>();
  if (!j.contains("region")) throw ParseError("sample.region", "missing region");
  x.region = compact_open_from_json(d, j.at("region"), "sample.region");
  if (!j.contains("counts") || !j.at("counts").is_array())
    throw ParseError("sample.counts", "missing counts");
  const Json& rows = j.at("counts");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string where = "sample.counts[" + std::to_string(i) + "]";
    const Json& row = rows[i];
    if (!row.is_array() || row.size() != 2 || !row.at(1).is_number_integer())
      throw ParseError(where, "expected [name, count]");
    const std::int64_t k = row.at(1).get<std::int64_t>();
    if (k < 0) throw ParseError(where, "negative count");
    const GroupElement name = element_from_json(d, row.at(0), where);
    if (!x.region.names.contains(name))
      throw ParseError(where, "count outside the region");
    if (k > 0) x.counts[name] += k;
  }
  return x;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string decay_csv(
    const std::vector<std::pair<std::int64_t, Rational>>& rows) {
  std::ostringstream out;
  out << "radius,num,den\n";
  for (const auto& [r, v] : rows)
    out << r << ',' << num_string(v) << ',' << den_string(v) << '\n';
  return out.str();
}

std::string entropy_csv(const EntropyCurve& curve) {
  std::ostringstream out;
  out << "n,mu_num,mu_den,f_nats\n";
  for (const EntropyPoint& p : curve.points)
    out << p.n << ',' << num_string(p.mu) << ',' << den_string(p.mu) << ','
        << format_double(p.f_nats) << '\n';
  return out.str();
}

std::string covariance_csv(const std::vector<CovarianceRow>& rows) {
  std::ostringstream out;
  out << "g_norm,exact_num,exact_den,mc_estimate,mc_stderr\n";
  for (const CovarianceRow& r : rows)
    out << r.g_norm << ',' << num_string(r.exact) << ','
        << den_string(r.exact) << ',' << format_double(r.mc_estimate) << ','
        << format_double(r.mc_stderr) << '\n';
  return out.str();
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  try {
    return Json::parse(in);
  } catch (const std::exception& e) {
    throw ParseError(path, e.what());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace cflab
