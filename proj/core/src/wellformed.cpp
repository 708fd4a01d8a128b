#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "alda/heap.hpp"
#include "alda/parser.hpp"

namespace alda {

using namespace ast;

namespace {

[[noreturn]] void fail(const std::string& code, const std::string& msg, SourceLoc loc) {
  throw CompileError(Diagnostic::Stage::WellFormed, code, msg, loc);
}

void collect_vars(const Atom& a, std::set<std::string>& out) {
  for (const auto& t : a.args) {
    if (const auto* v = std::get_if<LogicVar>(&t)) out.insert(v->name);
  }
}

void check_rule(const Rule& r) {
  for (const auto& t : r.conclusion.args) {
    if (std::holds_alternative<AnyArg>(t)) {
      fail("unsafe-rule", "wildcard in rule conclusion", r.loc);
    }
  }
  std::set<std::string> positive;
  for (const auto& h : r.hypotheses) {
    if (!h.negated) collect_vars(h.atom, positive);
  }
  std::set<std::string> needed;
  collect_vars(r.conclusion, needed);
  for (const auto& v : needed) {
    if (!positive.contains(v)) {
      fail("unsafe-rule",
           "variable '" + v + "' in conclusion of " + r.conclusion.pred.key() +
               " does not occur in a positive hypothesis",
           r.loc);
    }
  }
  for (const auto& h : r.hypotheses) {
    if (!h.negated) continue;
    std::set<std::string> vs;
    collect_vars(h.atom, vs);
    for (const auto& v : vs) {
      if (!positive.contains(v)) {
        fail("unsafe-rule",
             "variable '" + v + "' in negated " + h.atom.pred.key() +
                 " does not occur in a positive hypothesis",
             h.atom.loc);
      }
    }
  }
}

void check_ruleset(const RuleSetDef& rs) {
  std::map<std::string, std::size_t> arity;
  auto use = [&](const Atom& a) {
    auto [it, fresh] = arity.emplace(a.pred.key(), a.args.size());
    if (!fresh && it->second != a.args.size()) {
      fail("arity-mismatch",
           "predicate " + a.pred.key() + " used with " + std::to_string(a.args.size()) +
               " arguments, earlier with " + std::to_string(it->second) + " in rule set " +
               rs.name,
           a.loc);
    }
  };
  for (const auto& r : rs.rules) {
    check_rule(r);
    use(r.conclusion);
    for (const auto& h : r.hypotheses) use(h.atom);
  }
}

void check_rulesets(const std::vector<RuleSetDef>& rulesets, const std::string& scope) {
  std::unordered_set<std::string> names;
  for (const auto& rs : rulesets) {
    if (!names.insert(rs.name).second) {
      fail("duplicate-ruleset", "rule set '" + rs.name + "' defined twice in " + scope, rs.loc);
    }
    check_ruleset(rs);
  }
}

}  // namespace

void check_well_formed(const Program& program) {
  check_rulesets(program.rulesets, "global scope");
  std::unordered_map<std::string, const ClassDef*> classes;
  for (const auto& c : program.classes) {
    if (c.name == kSetClass || c.name == kSequenceClass) {
      fail("reserved-class", "class name '" + c.name + "' is reserved", c.loc);
    }
    if (!classes.emplace(c.name, &c).second) {
      fail("duplicate-class", "class '" + c.name + "' defined twice", c.loc);
    }
  }
  for (const auto& c : program.classes) {
    if (c.base && !classes.contains(*c.base)) {
      fail("unknown-class", "class '" + c.name + "' extends unknown class '" + *c.base + "'",
           c.loc);
    }
    // Inheritance must be acyclic.
    std::unordered_set<std::string> seen{c.name};
    for (const ClassDef* k = &c; k->base;) {
      k = classes.at(*k->base);
      if (!seen.insert(k->name).second) {
        fail("inheritance-cycle", "class '" + c.name + "' inherits from itself", c.loc);
      }
    }
    std::unordered_set<std::string> methods;
    for (const auto& m : c.methods) {
      if (!methods.insert(m.name).second) {
        fail("duplicate-method", "method '" + m.name + "' defined twice in class " + c.name,
             m.loc);
      }
      std::unordered_set<std::string> params;
      for (const auto& p : m.params) {
        if (!params.insert(p).second) {
          fail("duplicate-parameter", "parameter '" + p + "' repeated in " + c.name + "." + m.name,
               m.loc);
        }
      }
    }
    check_rulesets(c.rulesets, "class " + c.name);
  }
}

}  // namespace alda
