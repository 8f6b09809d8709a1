#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wde/conditions.hpp"
#include "wde/error.hpp"
#include "wde/inequalities.hpp"
#include "wde/io.hpp"
#include "wde/moments.hpp"
#include "wde/scenario.hpp"
#include "wde/selftest.hpp"

namespace wde {

enum ExitCode : int { kExitHolds = 0, kExitFails = 1, kExitInconclusive = 2, kExitUsage = 64 };

struct RunConfig {
  std::string command;
  std::string id;  ///< condition id, inequality id or chain label
  std::string scenario_path;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  double zcrit = 4.0;
  double tolerance = 1e-9;
  std::size_t chunk_size = 4096;
  unsigned threads = 0;
  bool force_monte_carlo = false;
  std::optional<std::string> out_path;
  std::string format = "json";
  std::string axis = "t";
  std::string grid;

  EvalOptions eval() const {
    EvalOptions opt;
    opt.sampling = SampleSpec{samples, seed, chunk_size, threads};
    opt.zcrit = zcrit;
    opt.tolerance = tolerance;
    opt.force_monte_carlo = force_monte_carlo;
    return opt;
  }

  void validate() const {
    if (samples < 1) throw ConfigError("--samples must be at least 1");
    if (chunk_size < 1) throw ConfigError("--chunk must be at least 1");
    if (!(zcrit > 0.0)) throw ConfigError("--zcrit must be positive");
    if (!(tolerance > 0.0)) throw ConfigError("--tol must be positive");
    if (format != "json" && format != "csv") throw ConfigError("--format must be json or csv");
  }
};

inline int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Holds: return kExitHolds;
    case Verdict::Fails: return kExitFails;
    case Verdict::Inconclusive: return kExitInconclusive;
  }
  return kExitUsage;
}

/// Checks the fields an id needs before anything is computed.
inline void require_fields(const Scenario& sc, const std::vector<std::string>& fields) {
  for (const std::string& f : fields) {
    if (f == "lambda") {
      sc.require_lambda();
    } else if (f == "r") {
      sc.require_r();
    } else if (f == "p") {
      if (!sc.p) throw ConfigError("scenario is missing field 'p'");
    } else if (f == "E" || f == "C2") {
      sc.matrix(f);
    } else if (f != "wf") {
      sc.pd(f);
    }
  }
}

inline const ConditionInfo& condition_info(const std::string& id) {
  for (const ConditionInfo& c : list_conditions()) {
    if (c.id == id) return c;
  }
  throw ConfigError("unknown id '" + id + "'");
}

namespace detail {

struct Output {
  std::string text;
  int code = kExitHolds;
};

inline Json envelope(const RunConfig& cfg, const std::string& command) {
  Json out{{"command", command}};
  if (!cfg.id.empty()) out["id"] = cfg.id;
  out["config"] = to_json(cfg.eval());
  return out;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline Output run_entropy(const RunConfig& cfg, const Scenario& sc) {
  const PDMatrix c = sc.pd("C");
  const EvalOptions opt = cfg.eval();
  const EntropyModel model(c, opt.prepare(sc.wf, c.dim()), opt.sampling);
  const Estimate e = model.joint(IndexSet::full(c.dim())).estimate();
  if (cfg.format == "csv") {
    std::ostringstream os;
    os.precision(17);
    os << "value,stderr\n" << e.value << ',' << e.std_error << '\n';
    return {os.str()};
  }
  Json out = envelope(cfg, "entropy");
  out["method"] = to_string(model.method());
  out["value"] = e.value;
  out["stderr"] = e.std_error;
  return {dump(out)};
}

inline Output run_moments(const RunConfig& cfg, const Scenario& sc) {
  const PDMatrix c = sc.pd("C");
  const EvalOptions opt = cfg.eval();
  const MomentSource src = MomentSource::plain(c, opt.prepare(sc.wf, c.dim()), opt.sampling);
  Json out = envelope(cfg, "moments");
  out["moments"] = to_json(moments_of(src, c.dim()));
  return {dump(out)};
}

inline Output run_chain(const RunConfig& cfg, const Scenario& sc) {
  if (cfg.id.size() != 1 || !is_chain_label(cfg.id[0])) {
    throw ConfigError("chain label must be one of h g p q I m s a w u z");
  }
  const char label = cfg.id[0];
  const PDMatrix c = sc.pd("C");
  const EvalOptions opt = cfg.eval();
  if (!sc.wf.accepts(c.dim())) throw ConfigError("dimension mismatch");
  if (label == 'a') require_toeplitz_chain(c, sc.wf);
  std::optional<double> r;
  if (label == 'g' || label == 's') r = sc.require_r();
  const EntropyModel model(c, opt.prepare(sc.wf, c.dim()), opt.sampling);
  ChainValues values;
  values.label = label;
  values.d = c.dim();
  values.method = model.method();
  for (const Quantity& q : chain_quantities(label, model, r)) values.values.push_back(q.estimate());
  if (cfg.format == "csv") return {chain_csv(values)};
  Json out = envelope(cfg, "chain");
  out["method"] = to_string(values.method);
  out["rows"] = to_json(values);
  return {dump(out)};
}

inline Output run_check(const RunConfig& cfg, const Scenario& sc) {
  require_fields(sc, condition_info(cfg.id).fields);
  const ConditionReport rep = check(cfg.id, sc, cfg.eval());
  Json out = envelope(cfg, "check");
  out["report"] = to_json(rep);
  return {dump(out), exit_code(rep.verdict)};
}

inline Output run_verify(const RunConfig& cfg, const Scenario& sc) {
  require_fields(sc, inequality_info(cfg.id).fields);
  const InequalityReport rep = verify(cfg.id, sc, cfg.eval());
  Json out = envelope(cfg, "verify");
  out["report"] = to_json(rep);
  return {dump(out), exit_code(rep.verdict)};
}

inline Output run_sweep(const RunConfig& cfg, const Scenario& sc) {
  if (cfg.grid.empty()) throw ConfigError("sweep needs --grid start:stop:step");
  const std::vector<double> grid = parse_grid(cfg.grid);
  std::vector<std::string> fields = inequality_info(cfg.id).fields;
  std::erase(fields, cfg.axis == "t" ? "wf" : cfg.axis);
  require_fields(sc, fields);
  const std::vector<SweepPoint> points = sweep(cfg.id, sc, cfg.axis, grid, cfg.eval());
  std::vector<Verdict> verdicts;
  for (const SweepPoint& p : points) verdicts.push_back(p.report.verdict);
  const int code = exit_code(combine(verdicts));
  if (cfg.format == "csv") return {sweep_csv(points), code};
  Json out = envelope(cfg, "sweep");
  out["axis"] = cfg.axis;
  Json rows = Json::array();
  for (const SweepPoint& p : points) rows.push_back(to_json(p));
  out["points"] = std::move(rows);
  return {dump(out), code};
}

inline Json to_json(const SelftestReport& r, const RunConfig& cfg) {
  Json out = envelope(cfg, "selftest");
  Json red = Json::array();
  for (const ReductionCase& c : r.reductions) {
    red.push_back(Json{{"d", c.d}, {"value", c.value}, {"expected", c.expected}, {"passed", c.passed}});
  }
  Json mom = Json::array();
  for (const MomentCase& c : r.moments) {
    mom.push_back(Json{{"d", c.d}, {"worst_z", c.worst_z}, {"agreed", c.agreed}});
  }
  out["reduction"] = Json{{"runs", r.reductions.size()}, {"passed", r.reductions_passed}, {"cases", std::move(red)}};
  out["moments"] = Json{{"runs", r.moments.size()},
                        {"agreed", r.moments_agreed},
                        {"required", r.moments_required},
                        {"cases", std::move(mom)}};
  out["verdict"] = r.passed ? "Holds" : "Fails";
  return out;
}

inline Output run_selftest(const RunConfig& cfg) {
  SelftestOptions opt;
  opt.sampling = cfg.eval().sampling;
  opt.zcrit = cfg.zcrit;
  opt.tolerance = cfg.tolerance;
  const SelftestReport rep = selftest(opt);
  return {dump(to_json(rep, cfg)), rep.passed ? kExitHolds : kExitFails};
}

inline Output run_list(const RunConfig& cfg) {
  Json conds = Json::array(), ineqs = Json::array();
  for (const ConditionInfo& c : list_conditions()) {
    conds.push_back(Json{{"id", c.id}, {"description", c.description}, {"fields", c.fields}});
  }
  for (const InequalityInfo& i : list_inequalities()) {
    ineqs.push_back(Json{{"id", i.id},
                         {"description", i.description},
                         {"fields", i.fields},
                         {"prerequisites", i.prerequisites}});
  }
  Json out{{"command", "list"}, {"conditions", std::move(conds)}, {"inequalities", std::move(ineqs)}};
  (void)cfg;
  return {dump(out)};
}

}  // namespace detail

/// Runs one command. Returns 0 (all Holds), 1 (any Fails), 2 (Inconclusive, none Fails)
/// or 64 (usage, scenario or numerical input error).
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  RunConfig cfg;
  if (const char* env = std::getenv("WDE_SEED")) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      err << "error: WDE_SEED must be a nonnegative integer\n";
      return kExitUsage;
    }
  }

  CLI::App app{"Weighted Gaussian entropies and weighted determinant inequalities", "wde"};
  app.require_subcommand(1);
  app.add_option("--scenario", cfg.scenario_path, "scenario JSON file");
  app.add_option("--samples", cfg.samples, "Monte Carlo sample count");
  app.add_option("--seed", cfg.seed, "base seed");
  app.add_option("--zcrit", cfg.zcrit, "critical z for verdicts");
  app.add_option("--tol", cfg.tolerance, "absolute tolerance on exact paths");
  app.add_option("--chunk", cfg.chunk_size, "samples per seeded chunk");
  app.add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
  app.add_flag("--mc", cfg.force_monte_carlo, "integrate closed-form weights by sampling too");
  app.add_option("--out", cfg.out_path, "write the report here instead of stdout");
  app.add_option("--format", cfg.format, "json or csv");
  app.add_option("--axis", cfg.axis, "sweep axis: t, lambda or r");
  app.add_option("--grid", cfg.grid, "sweep grid start:stop:step");

  struct Sub {
    const char* name;
    const char* help;
    bool takes_id;
    bool needs_scenario;
  };
  const Sub subs[] = {
      {"entropy", "weighted entropy of N(0, C)", false, true},
      {"moments", "weighted moments alpha and Phi", false, true},
      {"chain", "chain values for a label", true, true},
      {"check", "evaluate a condition", true, true},
      {"verify", "verify an inequality", true, true},
      {"sweep", "verify over a parameter grid", true, true},
      {"selftest", "closed-form and reduction batteries", false, false},
      {"list", "list condition and inequality ids", false, false},
  };
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->fallthrough();
    if (s.takes_id) sub->add_option("id", cfg.id, "identifier")->required();
    const std::string name = s.name;
    sub->callback([&cfg, name] { cfg.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitHolds : kExitUsage;
  }

  try {
    cfg.validate();
    const bool needs_scenario = cfg.command != "selftest" && cfg.command != "list";
    Scenario sc;
    if (needs_scenario) {
      if (cfg.scenario_path.empty()) throw ConfigError("--scenario is required for " + cfg.command);
      sc = load_scenario(cfg.scenario_path);
    }
    detail::Output result;
    if (cfg.command == "entropy") result = detail::run_entropy(cfg, sc);
    else if (cfg.command == "moments") result = detail::run_moments(cfg, sc);
    else if (cfg.command == "chain") result = detail::run_chain(cfg, sc);
    else if (cfg.command == "check") result = detail::run_check(cfg, sc);
    else if (cfg.command == "verify") result = detail::run_verify(cfg, sc);
    else if (cfg.command == "sweep") result = detail::run_sweep(cfg, sc);
    else if (cfg.command == "selftest") result = detail::run_selftest(cfg);
    else result = detail::run_list(cfg);

    if (cfg.out_path) {
      std::ofstream file(*cfg.out_path, std::ios::binary);
      if (!file) throw ConfigError("cannot write '" + *cfg.out_path + "'");
      file << result.text;
    } else {
      out << result.text;
    }
    return result.code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace wde
