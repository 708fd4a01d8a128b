// One PASS/FAIL line per acceptance criterion, with the pinned sizes and
// time limits. Exit status is nonzero when any criterion fails.
#include <sys/resource.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "alda/bench.hpp"
#include "alda/parser.hpp"
#include "alda/runtime.hpp"
#include "ast_fuzz.hpp"
#include "datalog_gen.hpp"
#include "harness.hpp"
#include "oracles.hpp"

namespace {

using namespace alda;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x, int prec = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", prec, x);
  return buf;
}

Value pair_value(Value a, Value b) { return Value::tuple({std::move(a), std::move(b)}); }

// ---- 1 ---------------------------------------------------------------------

Verdict tc_oracle() {
  const int graphs = 200;
  auto cp = compile(parse_program(
                        "rules trans_rs:\n"
                        "  path(x,y) if edge(x,y)\n"
                        "  path(x,y) if edge(x,z), path(z,y)\n"
                        "result := infer(path, edge=E, rules=trans_rs)\n"),
                    {"E"});
  std::mt19937_64 rng(1001);
  int ok = 0;
  std::size_t tuples = 0;
  for (int g = 0; g < graphs; ++g) {
    int n = std::uniform_int_distribution<int>(1, 50)(rng);
    double density = std::uniform_real_distribution<double>(0.0, 0.3)(rng);
    std::bernoulli_distribution edge(density);
    std::vector<std::pair<int, int>> edges;
    std::vector<Value> evs;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (!edge(rng)) continue;
        edges.push_back({i, j});
        evs.push_back(pair_value(Value::integer(i), Value::integer(j)));
      }
    }
    RunOptions opts;
    opts.global_sets = {{"E", evs}};
    Interpreter in(*cp, opts);
    in.run();
    std::set<std::pair<int, int>> got;
    for (const auto& t : in.set_elements(*in.global("result"))) {
      got.insert({static_cast<int>(t.as_tuple()[0].as_int()), static_cast<int>(t.as_tuple()[1].as_int())});
    }
    auto want = testing::floyd_warshall(n, edges);
    tuples += want.size();
    ok += got == want;
  }
  return {ok == graphs, std::to_string(ok) + "/" + std::to_string(graphs) +
                            " random digraphs (n<=50, density 0-0.3) equal the Floyd-Warshall closure, " +
                            std::to_string(tuples) + " closure tuples in total"};
}

// ---- 2 ---------------------------------------------------------------------

Verdict seminaive_vs_naive() {
  const int instances = 500;
  std::mt19937_64 rng(2002);
  int ok = 0, with_negation = 0;
  for (int i = 0; i < instances; ++i) {
    testing::DatalogGenParams p;
    p.negation = i % 2 == 1;
    with_negation += p.negation;
    auto inst = testing::random_instance(rng, p);
    auto a = testing::normalized(datalog::eval_rules(inst.rules, inst.facts, datalog::Strategy::SemiNaive));
    auto b = testing::normalized(datalog::eval_rules(inst.rules, inst.facts, datalog::Strategy::Naive));
    ok += a == b;
  }
  return {ok == instances, std::to_string(ok) + "/" + std::to_string(instances) +
                               " instances (<=5 preds, <=8 rules, arity<=3, domain<=10; " +
                               std::to_string(with_negation) + " with stratified negation) agree on every predicate"};
}

// ---- 3 ---------------------------------------------------------------------

Verdict negation_vs_brute_force() {
  const int instances = 200;
  std::mt19937_64 rng(3003);
  testing::DatalogGenParams p;
  p.negation = true;
  p.max_domain = 4;
  p.max_arity = 2;
  p.max_facts_per_pred = 8;
  int ok = 0, enumerated = 0, negated_rules = 0;
  for (int i = 0; i < instances; ++i) {
    auto inst = testing::random_instance(rng, p);
    for (const auto& r : inst.rules) {
      negated_rules += std::any_of(r.hypotheses.begin(), r.hypotheses.end(),
                                   [](const ast::RuleLiteral& l) { return l.negated; });
    }
    auto got = testing::normalized(datalog::eval_rules(inst.rules, inst.facts));
    auto oracle = testing::enumerate_minimal_model(inst);
    if (!oracle) continue;
    ++enumerated;
    bool same = true;
    for (const auto& [pred, rows] : *oracle) same = same && got[pred] == rows;
    ok += same;
  }
  return {ok == instances && enumerated == instances,
          std::to_string(ok) + "/" + std::to_string(instances) +
              " stratified instances (domain<=4) equal the least model found by enumerating every "
              "interpretation per stratum; " +
              std::to_string(negated_rules) + " rules with negation"};
}

// ---- 4 ---------------------------------------------------------------------

Verdict maintenance_invariant() {
  const int programs = 300;
  std::mt19937_64 rng(4004);
  int ok = 0;
  std::size_t checks = 0;
  std::string first_failure;
  for (int i = 0; i < programs; ++i) {
    std::string src = testing::random_maintenance_program(rng, 25);
    auto cp = compile(parse_program(src));
    std::string heaps[2];
    bool good = true;
    int k = 0;
    for (auto policy : {MaintenancePolicy::EveryMutation, MaintenancePolicy::Flagged}) {
      std::ostringstream out;
      RunOptions opts;
      opts.policy = policy;
      opts.out = &out;
      opts.after_statement = [&](const Interpreter& in, const ast::Stmt&) {
        ++checks;
        std::string msg = testing::check_maintained(in);
        if (!msg.empty() && good) {
          good = false;
          if (first_failure.empty()) first_failure = msg + " in program\n" + src;
        }
      };
      Interpreter in(*cp, opts);
      in.run();
      heaps[k++] = canonical_dump(in.heap(), in.globals()) + out.str();
    }
    if (heaps[0] != heaps[1] && good) {
      good = false;
      if (first_failure.empty()) first_failure = "policies disagree on program\n" + src;
    }
    ok += good;
  }
  if (!first_failure.empty()) std::cerr << first_failure << "\n";
  return {ok == programs, std::to_string(ok) + "/" + std::to_string(programs) +
                              " random interleavings over 1-3 objects hold the from-scratch invariant after all " +
                              std::to_string(checks) +
                              " statements under both maintenance policies, with equal final heaps"};
}

// ---- 5 ---------------------------------------------------------------------

Verdict update_discipline() {
  int static_ok = 0, static_n = 0, alias_ok = 0, alias_n = 0;
  for (const auto& f : testing::corpus_files("negative/static", ".alda")) {
    ++static_n;
    auto r = testing::run_cli({"run", f.string()});
    bool good = r.code == 2 && r.err.find("derived-write") != std::string::npos;
    if (!good) std::cerr << f << ": exit " << r.code << "\n" << r.err;
    static_ok += good;
  }
  for (const auto& f : testing::corpus_files("negative/aliased", ".alda")) {
    ++alias_n;
    auto check = testing::run_cli({"check", f.string()});
    auto r = testing::run_cli({"run", f.string()});
    bool good = check.code == 0 && r.code == 1 && r.err.find("DerivedWrite") != std::string::npos;
    if (!good) std::cerr << f << ": check " << check.code << ", run " << r.code << "\n" << r.err;
    alias_ok += good;
  }
  return {static_n == 20 && alias_n == 10 && static_ok == static_n && alias_ok == alias_n,
          std::to_string(static_ok) + "/" + std::to_string(static_n) +
              " static writes rejected with exit 2; " + std::to_string(alias_ok) + "/" +
              std::to_string(alias_n) + " aliased writes pass the checker and stop with DerivedWrite, exit 1"};
}

// ---- 6 ---------------------------------------------------------------------

Verdict rbac_scenario() {
  const std::vector<std::string> roles{"chair", "dean", "provost", "faculty", "staff", "student"};
  const int scenarios = 25, users = 10, updates = 12;
  std::mt19937_64 rng(6006);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  int ok = 0;
  std::size_t answers = 0;
  for (int sc = 0; sc < scenarios; ++sc) {
    bench::RbacScenario s;
    testing::RbacState st;
    auto user = [](int i) { return "u" + std::to_string(i); };
    for (const auto& r : roles) {
      s.roles.push_back(Value::string(r));
      st.roles.insert(r);
    }
    for (int i = 0; i < users; ++i) {
      s.users.push_back(Value::string(user(i)));
      st.users.insert(user(i));
    }
    for (int i = 0; i < users; ++i) {
      auto r = roles[pick(6)];
      s.ur.push_back(pair_value(Value::string(user(i)), Value::string(r)));
      st.ur.insert({user(i), r});
    }
    for (int i = 0; i < 4; ++i) {
      auto a = roles[pick(6)], d = roles[pick(6)];
      s.rh.push_back(pair_value(Value::string(a), Value::string(d)));
      st.rh.insert({a, d});
    }
    std::set<std::pair<std::int64_t, std::string>> want;
    for (int k = 0; k < updates; ++k) {
      bool ur = pick(2) == 0;
      std::string x = ur ? user(pick(users)) : roles[pick(6)], y = roles[pick(6)];
      std::string q = k % 2 == 0 ? "chair" : roles[pick(6)];
      s.updates.push_back(Value::tuple({Value::integer(k), Value::string(ur ? "ur" : "rh"),
                                        Value::string(x), Value::string(y), Value::string(q)}));
      (ur ? st.ur : st.rh).insert({x, y});
      for (const auto& u : testing::authorized_users(st, q)) want.insert({k, u});
    }
    bool good = true;
    for (auto v : {programs::RbacVariant::AllLocal, programs::RbacVariant::NonLocal,
                   programs::RbacVariant::Union}) {
      auto r = bench::run_rbac_variant(v, s);
      std::set<std::pair<std::int64_t, std::string>> got;
      for (const auto& a : r.answers) got.insert({a.as_tuple()[0].as_int(), a.as_tuple()[1].as_str()});
      good = good && got == want;
    }
    answers += want.size();
    ok += good;
  }
  // The bundled program: AuthorizedUsers('chair') over its own hierarchy.
  testing::RbacState fig;
  fig.users = {"ann", "bob", "cy"};
  fig.roles = {"chair", "dean", "faculty"};
  fig.ur = {{"ann", "chair"}, {"bob", "dean"}, {"cy", "faculty"}};
  fig.rh = {{"dean", "chair"}, {"chair", "faculty"}};
  std::string expect = "{";
  for (const auto& u : testing::authorized_users(fig, "chair")) expect += (expect.size() > 1 ? ", '" : "'") + u + "'";
  expect += "}\n";
  bool corpus_ok = true;
  for (const char* f : {"rbac.alda", "rbac_allloc.alda", "rbac_nonloc.alda"}) {
    corpus_ok = corpus_ok && testing::run_source(testing::read_file(testing::corpus_path(f))) == expect;
  }
  return {ok == scenarios && corpus_ok,
          std::to_string(ok) + "/" + std::to_string(scenarios) +
              " scenarios with 6 roles and 10 users give breadth-first-search answers in all three variants (" +
              std::to_string(answers) + " answers each); bundled programs print " +
              expect.substr(0, expect.size() - 1) + (corpus_ok ? "" : " NOT")};
}

// ---- 7 ---------------------------------------------------------------------

Verdict query_projection() {
  std::string src =
      "rules trans_rs:\n"
      "  path(x,y) if edge(x,y)\n"
      "  path(x,y) if edge(x,z), path(z,y)\n"
      "  hop(x,y,z) if edge(x,y), edge(y,z)\n"
      "E = {(1,2), (2,3)}\n"
      "R = 3\n"
      "a := infer(path, edge=E, rules=trans_rs)\n"
      "b := infer(path(_,_), edge=E, rules=trans_rs)\n"
      "c, d := infer(path(1,_), path(_,=R), edge=E, rules=trans_rs)\n"
      "e := infer(path(y, x), edge=E, rules=trans_rs)\n"
      "f := infer(hop(z, _, w), edge=E, rules=trans_rs)\n";
  auto cp = compile(parse_program(src));
  Interpreter in(*cp);
  in.run();
  auto rows = [&](const char* g) { return in.set_elements(*in.global(g)); };
  auto tup = [](std::vector<std::int64_t> xs) {
    std::vector<Value> vs;
    for (auto x : xs) vs.push_back(Value::integer(x));
    return Value::tuple(std::move(vs));
  };
  bool same_ab = rows("a") == rows("b");
  bool c_ok = rows("c") == std::vector<Value>{tup({2}), tup({3})};
  bool d_ok = rows("d") == std::vector<Value>{tup({1}), tup({2})};
  bool e_ok = rows("e") == rows("a");
  bool f_ok = rows("f") == std::vector<Value>{tup({1, 2, 3})};
  bool ok = same_ab && c_ok && d_ok && e_ok && f_ok && rows("a").size() == 3;
  return {ok, std::string("path == path(_,_) ") + (same_ab ? "holds" : "FAILS") +
                  "; path(1,_) -> {(2,),(3,)} " + (c_ok ? "ok" : "FAILS") +
                  "; path(_,=R) with R=3 -> {(1,),(2,)} " + (d_ok ? "ok" : "FAILS") +
                  "; first-occurrence order for path(y,x) and hop(z,_,w) " + (e_ok && f_ok ? "ok" : "FAILS")};
}

// ---- 8 ---------------------------------------------------------------------

Verdict lowering_differential() {
  std::map<std::string, int> per_construct;
  int pairs = 0, ok = 0;
  for (const auto& k : testing::corpus_files("differential", ".alda")) {
    std::string name = k.filename().string();
    if (name.find(".kernel.") == std::string::npos) continue;
    auto sugar = k.parent_path() / (name.substr(0, name.find(".kernel.")) + ".alda");
    ++pairs;
    std::string ks = testing::read_file(k), ss = testing::read_file(sugar);
    bool same = true;
    for (auto policy : {MaintenancePolicy::EveryMutation, MaintenancePolicy::Flagged}) {
      same = same && testing::final_heap(ss, policy) == testing::final_heap(ks, policy);
    }
    if (!same) std::cerr << sugar << " and its kernel form disagree\n";
    ok += same;
    if (same) ++per_construct[name.substr(0, name.rfind('_'))];
  }
  const std::vector<std::string> constructs{"ifsome", "whilesome", "comprehension", "each_and",
                                            "tuple_pattern", "infer_pattern"};
  bool coverage = true;
  std::string counts;
  for (const auto& c : constructs) {
    coverage = coverage && per_construct[c] >= 2;
    counts += (counts.empty() ? "" : ", ") + c + " " + std::to_string(per_construct[c]);
  }
  return {ok == pairs && coverage,
          std::to_string(ok) + "/" + std::to_string(pairs) +
              " sugared programs leave the same heap as their hand-written kernel form (" + counts + ")"};
}

// ---- 9 ---------------------------------------------------------------------

Verdict scaling() {
  bench::TcParams p500;
  p500.n = 500;
  auto r500 = bench::run_tc(p500);
  bench::TcParams p1000;
  p1000.n = 1000;
  auto r1000 = bench::run_tc(p1000);
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  double peak_mb = static_cast<double>(ru.ru_maxrss) / 1024.0;
  bool ok = r500.closure == 250000 && r500.seconds < 10 && r1000.closure == 1000000 &&
            r1000.seconds < 60 && peak_mb < 2048;
  return {ok, "500-cycle " + std::to_string(r500.closure) + " tuples in " + fmt(r500.seconds) +
                  " s (limit 10); 1000-cycle " + std::to_string(r1000.closure) + " tuples in " +
                  fmt(r1000.seconds) + " s (limit 60); peak RSS " + fmt(peak_mb, 0) + " MB (limit 2048)"};
}

// ---- 10 --------------------------------------------------------------------

bool fixed_point(const ast::Program& p) {
  std::string text = pretty_print(p);
  ast::Program q = parse_program(text);
  return q == p && pretty_print(q) == text;
}

Verdict parser_round_trip() {
  int files = 0, files_ok = 0;
  for (const char* dir : {".", "differential", "negative/static", "negative/aliased"}) {
    for (const auto& f : testing::corpus_files(dir, ".alda")) {
      ++files;
      bool good = false;
      try {
        good = fixed_point(parse_program(testing::read_file(f)));
      } catch (const CompileError& e) {
        std::cerr << f << ": " << e.what() << "\n";
      }
      files_ok += good;
    }
  }
  const int fuzzed = 1000;
  std::mt19937_64 rng(10010);
  int fuzz_ok = 0;
  for (int i = 0; i < fuzzed; ++i) {
    ast::Program p = testing::random_program(rng);
    bool good = false;
    try {
      good = fixed_point(p);
    } catch (const CompileError& e) {
      std::cerr << "fuzzed program " << i << ": " << e.what() << "\n" << pretty_print(p) << "\n";
    }
    fuzz_ok += good;
  }
  return {files_ok == files && fuzz_ok == fuzzed,
          std::to_string(files_ok) + "/" + std::to_string(files) + " corpus programs and " +
              std::to_string(fuzz_ok) + "/" + std::to_string(fuzzed) +
              " fuzzed ASTs satisfy parse(print(p)) == p and print is stable"};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0: no time limit beyond the criterion's own
  std::function<Verdict()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "tc-oracle", 30, tc_oracle},
      {2, "seminaive-naive", 60, seminaive_vs_naive},
      {3, "negation-brute-force", 60, negation_vs_brute_force},
      {4, "maintenance-invariant", 120, maintenance_invariant},
      {5, "update-discipline", 0, update_discipline},
      {6, "rbac", 0, rbac_scenario},
      {7, "query-projection", 0, query_projection},
      {8, "lowering-differential", 0, lowering_differential},
      {9, "scaling", 0, scaling},
      {10, "parser-round-trip", 0, parser_round_trip},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    auto t0 = Clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    double secs = seconds_since(t0);
    bool in_time = c.limit_s == 0 || secs < c.limit_s;
    bool pass = v.pass && in_time;
    failures += !pass;
    std::string timing = fmt(secs) + " s";
    if (c.limit_s > 0) timing += ", limit " + fmt(c.limit_s, 0) + " s";
    std::cout << (pass ? "PASS" : "FAIL") << "  " << c.id << " " << c.name << ": " << v.detail << " ["
              << timing << "]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
