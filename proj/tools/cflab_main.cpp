// cflab: batch experiment runner for (C,F)-schemes and their Poisson
// suspensions.  Every invocation writes one self-describing JSON report with
// an embedded config echo; data-heavy results go to CSV next to it.
//
// Exit status: 0 all verdicts pass, 1 some verdict failed (report still
// written), 2 usage or input errors (no report).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cflab/cfspace.hpp"
#include "cflab/entropy.hpp"
#include "cflab/io.hpp"
#include "cflab/scheme.hpp"
#include "cflab/suspension.hpp"

namespace {

using namespace cflab;

struct Options {
  std::string group;
  std::string scheme_path;
  int depth = 0;
  std::string radii;
  int budget = -1;  // -1: scheme depth
  std::int64_t trials = -1;
  std::uint64_t seed = 0;
  int level = 1;
  std::int64_t lmax = 10'000'000;
  std::string out = ".";
  int threads = 1;
  std::string config_path;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

GroupDescriptor parse_group(const std::string& name) {
  if (!name.empty() && name.front() == '{')
    return group_from_json(Json::parse(name));
  if (name == "z" || name == "z1") return GroupDescriptor::integer_lattice(1);
  if (name == "z2") return GroupDescriptor::integer_lattice(2);
  if (name == "z3") return GroupDescriptor::integer_lattice(3);
  if (name == "heis" || name == "heisenberg")
    return GroupDescriptor::discrete_heisenberg();
  if (name.rfind("dsum", 0) == 0) {
    std::vector<std::int64_t> orders = {2};
    int window = 16;
    // dsum[:comma-orders[:window]]
    std::string rest = name.substr(4);
    if (!rest.empty()) {
      if (rest.front() != ':') throw UsageError("unknown group '" + name + "'");
      rest.erase(0, 1);
      const auto colon = rest.find(':');
      const std::string orders_part = rest.substr(0, colon);
      orders.clear();
      std::size_t pos = 0;
      while (pos < orders_part.size()) {
        const auto comma = orders_part.find(',', pos);
        orders.push_back(std::stoll(orders_part.substr(pos, comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      if (colon != std::string::npos)
        window = std::stoi(rest.substr(colon + 1));
    }
    return GroupDescriptor::direct_sum_cyclic(std::move(orders), window);
  }
  throw UsageError("unknown group '" + name +
                   "' (try z, z2, z3, heis, dsum[:orders[:window]])");
}

std::vector<std::int64_t> parse_radii(const std::string& list) {
  std::vector<std::int64_t> out;
  std::size_t pos = 0;
  while (pos < list.size()) {
    const auto comma = list.find(',', pos);
    const std::string tok = list.substr(pos, comma - pos);
    const auto dots = tok.find("..");
    if (dots == std::string::npos) {
      out.push_back(std::stoll(tok));
    } else {
      const std::int64_t lo = std::stoll(tok.substr(0, dots));
      const std::int64_t hi = std::stoll(tok.substr(dots + 2));
      if (lo > hi) throw UsageError("radii range with lo > hi: " + tok);
      for (std::int64_t r = lo; r <= hi; ++r) out.push_back(r);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (!out.empty() && out.front() < 0) throw UsageError("negative radius");
  return out;
}

/// Scheme source resolution: an explicit file wins; otherwise a certified
/// scheme is built from --group and --depth.
CFScheme resolve_scheme(const Options& opt, std::vector<std::string>* warnings,
                        Json* config) {
  if (!opt.scheme_path.empty()) {
    CFScheme s = load_scheme(opt.scheme_path, warnings);
    (*config)["scheme"] = opt.scheme_path;
    (*config)["group"] = group_to_json(s.group);
    return s;
  }
  if (opt.group.empty() || opt.depth <= 0)
    throw UsageError("need --scheme FILE or both --group and --depth");
  const GroupDescriptor d = parse_group(opt.group);
  (*config)["group"] = group_to_json(d);
  (*config)["depth"] = opt.depth;
  return build_scheme(d, opt.depth, BuildParams::defaults(d, opt.depth));
}

Json verdict_row(const std::string& name, bool pass) {
  return Json{{"name", name}, {"pass", pass}};
}

bool all_pass(const Json& verdicts) {
  for (const Json& v : verdicts)
    if (!v.at("pass").get<bool>()) return false;
  return true;
}

void write_report(const Options& opt, Json report) {
  std::filesystem::create_directories(opt.out);
  write_text_file((std::filesystem::path(opt.out) / "report.json").string(),
                  report.dump(2) + "\n");
}

/// Standard condition suite: defining conditions, Folner schedule
/// eps_n = 1/(n+2) against the per-kind default test set, mixing grades.
std::vector<ConditionReport> condition_suite(const CFScheme& s) {
  const BuildParams defaults = BuildParams::defaults(s.group, s.depth());
  return {check_base(s),
          check_folner_schedule(s, *defaults.folner_test_set,
                                defaults.folner_eps),
          check_mixing(s)};
}

int run_build(const Options& opt) {
  Json config;
  if (opt.group.empty() || opt.depth <= 0)
    throw UsageError("build needs --group and --depth");
  const GroupDescriptor d = parse_group(opt.group);
  config["group"] = group_to_json(d);
  config["depth"] = opt.depth;

  const CFScheme s = build_scheme(d, opt.depth, BuildParams::defaults(d, opt.depth));
  std::filesystem::create_directories(opt.out);
  save_scheme(s, (std::filesystem::path(opt.out) / "scheme.json").string());

  Json verdicts = Json::array();
  Json reports = Json::array();
  for (const ConditionReport& r : condition_suite(s)) {
    verdicts.push_back(verdict_row(r.condition, r.passed()));
    reports.push_back(r.to_json());
  }
  Json report{{"tool", "cflab"},
              {"command", "build"},
              {"config", config},
              {"artifacts", Json{{"scheme", "scheme.json"}}},
              {"verdicts", verdicts},
              {"pass", all_pass(verdicts)},
              {"reports", reports}};
  write_report(opt, report);
  return all_pass(verdicts) ? 0 : 1;
}

int run_check(const Options& opt) {
  Json config;
  std::vector<std::string> warnings;
  const CFScheme s = resolve_scheme(opt, &warnings, &config);

  Json verdicts = Json::array();
  Json reports = Json::array();
  for (const ConditionReport& r : condition_suite(s)) {
    verdicts.push_back(verdict_row(r.condition, r.passed()));
    reports.push_back(r.to_json());
  }
  Json report{{"tool", "cflab"},
              {"command", "check"},
              {"config", config},
              {"warnings", warnings},
              {"verdicts", verdicts},
              {"pass", all_pass(verdicts)},
              {"reports", reports}};
  write_report(opt, report);
  return all_pass(verdicts) ? 0 : 1;
}

int run_mixing(const Options& opt) {
  Json config;
  std::vector<std::string> warnings;
  const CFScheme s = resolve_scheme(opt, &warnings, &config);
  const CfSpace space(s);
  const int budget = opt.budget < 0 ? s.depth() : opt.budget;
  std::vector<std::int64_t> radii =
      opt.radii.empty() ? parse_radii("0.." + std::to_string(exhaustion_radius(s)))
                        : parse_radii(opt.radii);
  if (radii.empty()) throw UsageError("empty radii list");
  config["radii"] = radii;
  config["budget"] = budget;

  const CompactOpen a = space.refine(space.cylinder(0, s.group.identity()), 1);
  const auto curve = space.decay_curve(a, a, radii, budget, opt.threads);

  // r0: past the last radius with a nonzero correlation the curve is exactly
  // zero.  The raw curve is bumpy (overlaps recur at the copy-offset radii
  // of every level), so the decaying object is the tail maximum; the
  // verdicts ask that the sweep reaches the zero regime and that the upper
  // half of the decay range only carries strictly smaller correlations than
  // the lower half.
  std::int64_t r0 = 0;
  for (const auto& [r, v] : curve)
    if (v != Rational(0)) r0 = r + 1;
  const bool tail_zero = !curve.empty() && r0 <= curve.back().first;
  const std::int64_t half = r0 / 2;
  Rational lower_max(0), upper_max(0);
  for (const auto& [r, v] : curve) {
    Rational& slot = r < half ? lower_max : upper_max;
    slot = std::max(slot, v);
  }
  const bool envelope_ok = r0 == 0 || upper_max < lower_max;

  std::filesystem::create_directories(opt.out);
  write_text_file((std::filesystem::path(opt.out) / "decay.csv").string(),
                  decay_csv(curve));

  Json verdicts =
      Json::array({verdict_row("tail-exactly-zero", tail_zero),
                   verdict_row("envelope-decays-by-half-r0", envelope_ok)});
  Json report{{"tool", "cflab"},
              {"command", "mixing"},
              {"config", config},
              {"warnings", warnings},
              {"artifacts", Json{{"decay", "decay.csv"}}},
              {"verdicts", verdicts},
              {"pass", all_pass(verdicts)},
              {"r0", r0}};
  write_report(opt, report);
  return all_pass(verdicts) ? 0 : 1;
}

int run_entropy(const Options& opt) {
  Json config;
  std::vector<std::string> warnings;
  const CFScheme s = resolve_scheme(opt, &warnings, &config);
  const EntropyCurve curve = entropy_bound_curve(s);

  std::filesystem::create_directories(opt.out);
  write_text_file((std::filesystem::path(opt.out) / "entropy.csv").string(),
                  entropy_csv(curve));

  Json points = Json::array();
  for (const EntropyPoint& p : curve.points)
    points.push_back(Json{{"n", p.n},
                          {"mu_num", num_string(p.mu)},
                          {"mu_den", den_string(p.mu)},
                          {"f_nats", p.f_nats}});
  Json verdicts =
      Json::array({verdict_row("strictly-decreasing", curve.decreasing)});
  Json report{{"tool", "cflab"},
              {"command", "entropy"},
              {"config", config},
              {"warnings", warnings},
              {"artifacts", Json{{"entropy", "entropy.csv"}}},
              {"verdicts", verdicts},
              {"pass", all_pass(verdicts)},
              {"points", points}};
  write_report(opt, report);
  return all_pass(verdicts) ? 0 : 1;
}

int run_sample(const Options& opt) {
  Json config;
  std::vector<std::string> warnings;
  const CFScheme s = resolve_scheme(opt, &warnings, &config);
  const CfSpace space(s);
  if (opt.level < 0 || opt.level > s.depth())
    throw UsageError("--level outside [0, depth]");
  const std::int64_t trials = opt.trials < 0 ? 1 : opt.trials;
  config["level"] = opt.level;
  config["seed"] = opt.seed;
  config["trials"] = trials;

  const CompactOpen region = space.full_level(opt.level);
  const PoissonSample x = sample(space, region, opt.level, opt.seed);
  std::filesystem::create_directories(opt.out);
  write_text_file((std::filesystem::path(opt.out) / "sample.json").string(),
                  sample_to_json(s.group, x).dump(2) + "\n");

  Json verdicts = Json::array();
  Json stats;
  if (trials > 1) {
    // fixed two-block coarsening: the identity cylinder of the base level
    // against the rest of the working level
    const CompactOpen head =
        space.refine(space.cylinder(0, s.group.identity()), opt.level);
    const CompactOpen rest = space.boolean_op(BoolOp::Subtract, region, head);
    std::vector<CompactOpen> blocks = {head};
    if (!rest.names.empty()) blocks.push_back(rest);
    const CoarsenStats c =
        coarsen_check(space, region, opt.level, blocks, trials, opt.seed);
    verdicts.push_back(verdict_row("coarse-counts-poisson", c.chi_square_pass));
    verdicts.push_back(
        verdict_row("blocks-uncorrelated", c.independence_pass));
    Json fits = Json::array();
    for (const BlockFit& b : c.blocks)
      fits.push_back(Json{{"mean_num", num_string(b.mean)},
                          {"mean_den", den_string(b.mean)},
                          {"chi_square", b.chi_square},
                          {"dof", b.dof},
                          {"p_value", b.p_value}});
    stats = Json{{"blocks", fits},
                 {"max_abs_correlation", c.max_abs_correlation},
                 {"correlation_threshold", c.correlation_threshold},
                 {"significance", c.significance}};
  }
  Json report{{"tool", "cflab"},
              {"command", "sample"},
              {"config", config},
              {"warnings", warnings},
              {"artifacts", Json{{"sample", "sample.json"}}},
              {"verdicts", verdicts},
              {"pass", all_pass(verdicts)},
              {"total", x.total()}};
  if (!stats.is_null()) report["stats"] = stats;
  write_report(opt, report);
  return all_pass(verdicts) ? 0 : 1;
}

int run_covariance(const Options& opt) {
  Json config;
  std::vector<std::string> warnings;
  const CFScheme s = resolve_scheme(opt, &warnings, &config);
  const CfSpace space(s);
  const int budget = opt.budget < 0 ? s.depth() : opt.budget;
  const std::int64_t trials = opt.trials < 0 ? 10'000 : opt.trials;
  std::vector<std::int64_t> radii =
      opt.radii.empty()
          ? parse_radii("0.." + std::to_string(
                                    std::min<std::int64_t>(3, exhaustion_radius(s))))
          : parse_radii(opt.radii);
  if (radii.empty()) throw UsageError("empty radii list");
  config["radii"] = radii;
  config["budget"] = budget;
  config["trials"] = trials;
  config["seed"] = opt.seed;

  const CompactOpen a = space.refine(space.cylinder(0, s.group.identity()), 1);
  std::vector<CovarianceRow> rows;
  Json notes = Json::array();
  bool brackets = true;
  for (std::int64_t r : radii) {
    const FiniteSet sh = shell(s.group, r);
    if (sh.empty()) {
      notes.push_back("radius " + std::to_string(r) + ": empty shell, skipped");
      continue;
    }
    const GroupElement g = sh.element_at(s.group, 0);
    try {
      const Rational exact = exact_covariance(space, g, a, a, budget);
      const McCovariance mc =
          mc_covariance(space, g, a, a, trials, opt.seed, budget);
      rows.push_back({r, exact, mc.estimate, mc.stderr_value});
      const double gap = std::abs(mc.estimate - to_double(exact));
      if (gap > 3.0 * mc.stderr_value + 1e-15) brackets = false;
    } catch (const UndefinedAtBudgetError& e) {
      notes.push_back("radius " + std::to_string(r) +
                      ": unresolvable at budget, skipped (" + e.what() + ")");
    }
  }
  if (rows.empty()) throw UsageError("no resolvable radii in the sweep");

  std::filesystem::create_directories(opt.out);
  write_text_file((std::filesystem::path(opt.out) / "covariance.csv").string(),
                  covariance_csv(rows));

  Json verdicts =
      Json::array({verdict_row("mc-brackets-exact-within-3-stderr", brackets)});
  Json report{{"tool", "cflab"},
              {"command", "covariance"},
              {"config", config},
              {"warnings", warnings},
              {"artifacts", Json{{"covariance", "covariance.csv"}}},
              {"verdicts", verdicts},
              {"pass", all_pass(verdicts)},
              {"notes", notes}};
  write_report(opt, report);
  return all_pass(verdicts) ? 0 : 1;
}

int run_freeness(const Options& opt) {
  Json config;
  std::vector<std::string> warnings;
  const CFScheme s = resolve_scheme(opt, &warnings, &config);
  const int budget = opt.budget < 0 ? s.depth() : opt.budget;
  config["budget"] = budget;
  config["lmax"] = opt.lmax;

  const BuildParams defaults = BuildParams::defaults(s.group, s.depth());
  std::vector<GroupElement> tests = defaults.displacement_witnesses;
  tests.insert(tests.end(), defaults.stabilizer_witnesses.begin(),
               defaults.stabilizer_witnesses.end());

  Json verdicts = Json::array();
  Json rows = Json::array();
  for (const GroupElement& g : tests) {
    const std::string label = element_to_json(s.group, g).dump();
    Json row{{"g", element_to_json(s.group, g)}};
    bool pass = false;
    try {
      const FreenessWitness w = freeness_witness(s, g, opt.lmax, budget);
      row["branch"] = w.torsion ? "stabilizer" : "displacement";
      if (w.torsion) {
        row["order"] = w.order;
        row["stabilized_levels"] = w.stabilized_levels;
        Json orbits = Json::array();
        for (const auto& orbit : w.orbits) {
          Json o = Json::array();
          for (const GroupElement& e : orbit)
            o.push_back(element_to_json(s.group, e));
          orbits.push_back(o);
        }
        row["orbits"] = orbits;
        pass = !w.stabilized_levels.empty();
      } else {
        row["level"] = w.level;
        row["displacement"] = w.displacement;
        row["correlation_num"] = num_string(w.correlation_value);
        row["correlation_den"] = den_string(w.correlation_value);
        pass = w.correlation_value == Rational(0);
      }
    } catch (const SearchExhaustedError& e) {
      row["error"] = e.what();
    } catch (const WrongDichotomyError& e) {
      row["error"] = e.what();
    }
    row["pass"] = pass;
    rows.push_back(row);
    verdicts.push_back(verdict_row("witness " + label, pass));
  }

  Json report{{"tool", "cflab"},
              {"command", "freeness"},
              {"config", config},
              {"warnings", warnings},
              {"verdicts", verdicts},
              {"pass", all_pass(verdicts)},
              {"witnesses", rows}};
  write_report(opt, report);
  return all_pass(verdicts) ? 0 : 1;
}

/// Fills unset flags from a JSON config file mirroring the flag names.
void apply_config_file(const CLI::App* cmd, Options* opt) {
  if (opt->config_path.empty()) return;
  const Json j = load_json_file(opt->config_path);
  if (!j.is_object()) throw ParseError(opt->config_path, "expected an object");
  auto unset = [&](const char* flag) {
    const CLI::Option* o = cmd->get_option_no_throw(std::string("--") + flag);
    return o != nullptr && o->count() == 0 && j.contains(flag);
  };
  if (unset("group")) opt->group = j.at("group").get<std::string>();
  if (unset("scheme")) opt->scheme_path = j.at("scheme").get<std::string>();
  if (unset("depth")) opt->depth = j.at("depth").get<int>();
  if (unset("radii")) opt->radii = j.at("radii").get<std::string>();
  if (unset("budget")) opt->budget = j.at("budget").get<int>();
  if (unset("trials")) opt->trials = j.at("trials").get<std::int64_t>();
  if (unset("seed")) opt->seed = j.at("seed").get<std::uint64_t>();
  if (unset("level")) opt->level = j.at("level").get<int>();
  if (unset("lmax")) opt->lmax = j.at("lmax").get<std::int64_t>();
  if (unset("out")) opt->out = j.at("out").get<std::string>();
  if (unset("threads")) opt->threads = j.at("threads").get<int>();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"computational laboratory for (C,F)-constructions and their "
               "Poisson suspensions"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* cmd, bool scheme_source) {
    if (scheme_source) {
      cmd->add_option("--group", opt.group,
                      "group name (z, z2, z3, heis, dsum[:orders[:window]]) "
                      "or inline JSON");
      cmd->add_option("--scheme", opt.scheme_path, "scheme JSON file");
      cmd->add_option("--depth", opt.depth, "build depth when no --scheme");
    }
    cmd->add_option("--out", opt.out, "output directory (default .)");
    cmd->add_option("--config", opt.config_path,
                    "JSON file mirroring flags; explicit flags win");
    return cmd;
  };

  CLI::App* build = app.add_subcommand("build", "build a certified scheme");
  build->add_option("--group", opt.group, "group name or inline JSON")
      ->required();
  build->add_option("--depth", opt.depth, "number of levels")->required();
  add_common(build, false);

  CLI::App* check =
      add_common(app.add_subcommand(
                     "check", "run the condition suite on a scheme"),
                 true);

  CLI::App* mixing = add_common(
      app.add_subcommand("mixing", "exact correlation decay over shells"),
      true);
  mixing->add_option("--radii", opt.radii, "list/ranges, e.g. 0..8,12");
  mixing->add_option("--budget", opt.budget, "action level budget");
  mixing->add_option("--threads", opt.threads, "worker threads (sweep only)");

  CLI::App* entropy = add_common(
      app.add_subcommand("entropy", "entropy bound curve"), true);

  CLI::App* samp = add_common(
      app.add_subcommand("sample",
                         "draw a suspension sample; with --trials > 1 run "
                         "the coarsening suite"),
      true);
  samp->add_option("--level", opt.level, "resolution level (default 1)");
  samp->add_option("--seed", opt.seed, "base seed");
  samp->add_option("--trials", opt.trials, "suite repetitions");

  CLI::App* cov = add_common(
      app.add_subcommand("covariance",
                         "exact vs Monte-Carlo covariance over shell "
                         "representatives"),
      true);
  cov->add_option("--radii", opt.radii, "list/ranges of shell norms");
  cov->add_option("--budget", opt.budget, "action level budget");
  cov->add_option("--trials", opt.trials, "Monte-Carlo trials (default 1e4)");
  cov->add_option("--seed", opt.seed, "base seed");

  CLI::App* freeness = add_common(
      app.add_subcommand("freeness",
                         "freeness witnesses for the default test elements"),
      true);
  freeness->add_option("--budget", opt.budget, "action level budget");
  freeness->add_option("--lmax", opt.lmax, "displacement search bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    apply_config_file(cmd, &opt);
    if (cmd == build) return run_build(opt);
    if (cmd == check) return run_check(opt);
    if (cmd == mixing) return run_mixing(opt);
    if (cmd == entropy) return run_entropy(opt);
    if (cmd == samp) return run_sample(opt);
    if (cmd == cov) return run_covariance(opt);
    if (cmd == freeness) return run_freeness(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
