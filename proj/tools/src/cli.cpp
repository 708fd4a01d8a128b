#include "alda/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "alda/bench.hpp"
#include "alda/facts.hpp"
#include "alda/lowering.hpp"
#include "alda/parser.hpp"
#include "alda/runtime.hpp"

namespace alda::cli {

using nlohmann::json;

namespace {

json loc_json(const SourceLoc& l) { return {{"line", l.line}, {"column", l.column}}; }

struct Reporter {
  const RunConfig& cfg;
  std::ostream& out;
  std::ostream& err;
  json doc = json::object();

  int compile_error(const CompileError& e) {
    if (cfg.json) {
      json ds = json::array();
      for (const auto& d : e.diagnostics()) {
        ds.push_back({{"stage", stage_name(d.stage)}, {"code", d.code}, {"message", d.message},
                      {"loc", loc_json(d.loc)}});
      }
      doc["status"] = "compile-error";
      doc["diagnostics"] = ds;
    } else {
      for (const auto& d : e.diagnostics()) err << cfg.program_path << ":" << d.to_string() << "\n";
    }
    return kCompileError;
  }

  int runtime_error(const RuntimeError& e) {
    if (cfg.json) {
      doc["status"] = "runtime-error";
      doc["error"] = {{"kind", kind_name(e.kind())}, {"message", e.detail()}, {"loc", loc_json(e.loc())}};
    } else {
      err << cfg.program_path << ":" << format_loc(e.loc()) << ": " << kind_name(e.kind()) << ": "
          << e.detail() << "\n";
    }
    return kRuntimeError;
  }

  int fact_error(const std::string& path, const FactFileError& e) {
    if (cfg.json) {
      doc["status"] = "runtime-error";
      doc["error"] = {{"kind", kind_name(e.kind())}, {"message", e.what()}, {"file", path},
                      {"line", e.line()}};
    } else {
      err << path << ": " << kind_name(e.kind()) << ": " << e.what() << "\n";
    }
    return kRuntimeError;
  }

  int usage(const std::string& msg) {
    if (cfg.json) {
      doc["status"] = "usage-error";
      doc["message"] = msg;
    } else {
      err << "usage error: " << msg << "\n";
    }
    return kUsageError;
  }

  int finish(int code) {
    if (cfg.json) {
      if (!doc.contains("status")) doc["status"] = "ok";
      doc["exit"] = code;
      out << doc.dump(2) << "\n";
    }
    return code;
  }
};

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_program(const RunConfig& cfg, Reporter& rep, std::ostream& out, std::ostream& err) {
  auto text = read_file(cfg.program_path);
  if (!text) return rep.usage("cannot read " + cfg.program_path);
  std::vector<std::string> names;
  for (const auto& [n, p] : cfg.facts) names.push_back(n);

  std::unique_ptr<CompiledProgram> cp;
  try {
    ast::Program surface = parse_program(*text);
    if (cfg.subcommand == "kernel") {
      out << pretty_print(lowering::lower(std::move(surface), names));
      return kOk;
    }
    cp = compile(surface, names);
  } catch (const CompileError& e) {
    return rep.compile_error(e);
  }
  for (const auto& n : names) {
    if (std::find(cp->globals.begin(), cp->globals.end(), n) == cp->globals.end()) {
      return rep.usage("--facts " + n + ": not a global variable of the program");
    }
  }

  if (cfg.subcommand == "check") {
    json sites = json::array();
    for (const auto& s : cp->sites.sites) {
      if (cfg.json) {
        sites.push_back({{"loc", loc_json(s.loc)}, {"kind", site_kind_name(s.kind)},
                         {"target", s.what}, {"rulesets", s.rulesets}});
      } else {
        out << format_loc(s.loc) << ": " << site_kind_name(s.kind) << " " << s.what;
        for (const auto& r : s.rulesets) out << " " << r;
        out << "\n";
      }
    }
    json rulesets = json::array();
    for (const auto& [name, rs] : cp->rulesets) {
      std::vector<std::vector<std::string>> strata;
      for (const auto& st : rs.program->strata()) strata.emplace_back(st.begin(), st.end());
      if (cfg.json) {
        rulesets.push_back({{"name", name}, {"base", rs.info.base}, {"derived", rs.info.derived},
                            {"strata", strata}});
      } else {
        out << "ruleset " << name << ": base";
        for (const auto& b : rs.info.base) out << " " << b;
        out << "; strata";
        for (const auto& st : strata) {
          out << " {";
          for (std::size_t i = 0; i < st.size(); ++i) out << (i ? " " : "") << st[i];
          out << "}";
        }
        out << "\n";
      }
    }
    rep.doc["sites"] = sites;
    rep.doc["rulesets"] = rulesets;
    return kOk;
  }

  RunOptions opt;
  opt.policy = cfg.flagged_only ? MaintenancePolicy::Flagged : MaintenancePolicy::EveryMutation;
  opt.seed = cfg.seed;
  std::ostringstream captured;
  opt.out = cfg.json ? &captured : &out;
  json trace = json::array();
  if (cfg.trace_maintenance) {
    opt.on_maintain = [&](const MaintenanceEvent& ev) {
      if (cfg.json) {
        json ds = json::array();
        for (const auto& d : ev.deltas) {
          ds.push_back({{"predicate", d.predicate}, {"added", d.added}, {"removed", d.removed}});
        }
        trace.push_back({{"ruleset", ev.ruleset}, {"object", ev.object.id}, {"deltas", ds}});
        return;
      }
      err << "maintain " << ev.ruleset << " @" << ev.object.id;
      for (const auto& d : ev.deltas) err << " " << d.predicate << " +" << d.added << " -" << d.removed;
      err << "\n";
    };
  }
  opt.load_facts = [](const std::string& path) {
    try {
      return load_fact_file(path).tuples;
    } catch (const FactFileError& e) {
      throw RuntimeError(RuntimeErrorKind::IoError, e.what());
    }
  };
  for (const auto& [n, path] : cfg.facts) {
    try {
      opt.global_sets.emplace_back(n, load_fact_file(path).tuples);
    } catch (const FactFileError& e) {
      return rep.fact_error(path, e);
    }
  }

  int code = kOk;
  Interpreter it(*cp, std::move(opt));
  try {
    it.run();
  } catch (const RuntimeError& e) {
    code = rep.runtime_error(e);
  }
  if (cfg.json) {
    json lines = json::array();
    std::istringstream in(captured.str());
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    rep.doc["output"] = lines;
    if (cfg.trace_maintenance) rep.doc["trace"] = trace;
    rep.doc["stats"] = {{"statements", it.stats().statements},
                        {"maintain_calls", it.stats().maintain_calls},
                        {"inferences", it.stats().inferences}};
  }
  (void)err;
  return code;
}

int run_bench(const RunConfig& cfg, Reporter& rep, std::ostream& out) {
  json runs = json::array();
  if (cfg.suite == "tc" || cfg.suite == "tc-rev") {
    bench::TcParams p;
    p.n = cfg.nodes;
    p.reversed = cfg.suite == "tc-rev";
    p.graph = cfg.graph == "random" ? bench::GraphKind::Random : bench::GraphKind::Cycle;
    p.density = cfg.density;
    p.seed = cfg.seed.value_or(1);
    for (int r = 0; r < cfg.reps; ++r) {
      auto res = bench::run_tc(p);
      if (cfg.json) {
        runs.push_back({{"rep", r}, {"seconds", res.seconds}, {"edges", res.edges},
                        {"closure", res.closure}});
      } else {
        out << cfg.suite << " graph=" << cfg.graph << " n=" << p.n << " edges=" << res.edges
            << " closure=" << res.closure << " time_ms=" << res.seconds * 1000 << "\n";
      }
    }
  } else if (cfg.suite == "rbac") {
    bench::RbacParams p{cfg.users, cfg.roles, cfg.updates, cfg.seed.value_or(1)};
    for (int r = 0; r < cfg.reps; ++r) {
      auto res = bench::run_rbac(p);
      json vs = json::array();
      for (const auto& v : res.variants) {
        if (cfg.json) {
          vs.push_back({{"variant", programs::rbac_variant_name(v.variant)},
                        {"seconds", v.seconds}, {"answers", v.answers.size()}});
        } else {
          out << "rbac variant=" << programs::rbac_variant_name(v.variant) << " users=" << p.users
              << " roles=" << p.roles << " updates=" << p.updates << " answers=" << v.answers.size()
              << " time_ms=" << v.seconds * 1000 << "\n";
        }
      }
      if (cfg.json) {
        runs.push_back({{"rep", r}, {"variants", vs}, {"identical", res.identical}});
      } else {
        out << "rbac variants identical: " << (res.identical ? "yes" : "NO") << "\n";
      }
      if (!res.identical) {
        rep.doc["runs"] = runs;
        rep.doc["status"] = "mismatch";
        return kRuntimeError;
      }
    }
  } else {
    return rep.usage("unknown bench suite " + cfg.suite);
  }
  rep.doc["suite"] = cfg.suite;
  rep.doc["runs"] = runs;
  return kOk;
}

}  // namespace

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Reporter rep{cfg, out, err};
  int code;
  try {
    code = cfg.subcommand == "bench" ? run_bench(cfg, rep, out) : run_program(cfg, rep, out, err);
  } catch (const CompileError& e) {
    code = rep.compile_error(e);
  } catch (const RuntimeError& e) {
    code = rep.runtime_error(e);
  }
  return rep.finish(code);
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Alda: imperative programs with integrated Datalog rule sets"};
  app.require_subcommand(1);
  std::vector<std::string> facts;
  auto common = [&](CLI::App* sub, bool program) {
    if (program) sub->add_option("program", cfg.program_path, "source file")->required();
    sub->add_flag("--json", cfg.json, "machine-readable output");
    sub->add_option("--seed", cfg.seed, "seed for set iteration order and generated inputs");
  };
  for (const char* name : {"run", "check", "kernel"}) {
    auto* sub = app.add_subcommand(name, std::string(name) == "run"      ? "execute a program"
                                         : std::string(name) == "check" ? "report update sites and strata"
                                                                        : "print the lowered program");
    common(sub, true);
    sub->add_option("--facts", facts, "bind global NAME to the facts in PATH")
        ->type_name("NAME=PATH");
    if (std::string(name) == "run") {
      sub->add_flag("--trace-maintenance", cfg.trace_maintenance,
                    "log every implicit inference with its deltas");
      sub->add_flag("!--maintain-every-mutation", cfg.flagged_only,
                    "maintain after every mutation, not only at flagged sites");
    }
  }
  auto* bench = app.add_subcommand("bench", "run a benchmark suite");
  common(bench, false);
  bench->add_option("suite", cfg.suite, "tc, tc-rev or rbac")
      ->required()
      ->check(CLI::IsMember({"tc", "tc-rev", "rbac"}));
  bench->add_option("--nodes", cfg.nodes, "graph size");
  bench->add_option("--graph", cfg.graph, "cycle or random")->check(CLI::IsMember({"cycle", "random"}));
  bench->add_option("--density", cfg.density, "edge probability for random graphs");
  bench->add_option("--users", cfg.users, "rbac: number of users");
  bench->add_option("--roles", cfg.roles, "rbac: number of roles");
  bench->add_option("--updates", cfg.updates, "rbac: update-and-query steps");
  bench->add_option("--reps", cfg.reps, "repetitions per measurement")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kUsageError;
  }
  for (const auto& f : facts) {
    auto eq = f.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == f.size()) {
      err << "usage error: --facts expects NAME=PATH, got " << f << "\n";
      return kUsageError;
    }
    cfg.facts.emplace_back(f.substr(0, eq), f.substr(eq + 1));
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();
  return execute(cfg, out, err);
}

}  // namespace alda::cli
