#include "datalog_gen.hpp"

#include <algorithm>
#include <set>

#include "alda/parser.hpp"

namespace alda::testing {

using ast::Atom;
using ast::LogicVar;
using ast::RuleTerm;

namespace {

int uniform(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool chance(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

}  // namespace

Atom atom(const std::string& pred, std::vector<RuleTerm> args) {
  Atom a;
  a.pred.scope = ast::PredicateRef::Scope::Local;
  a.pred.path = {pred};
  a.args = std::move(args);
  return a;
}

std::vector<std::string> DatalogInstance::derived() const {
  std::vector<std::string> out;
  for (const auto& [p, l] : level) {
    if (l > 0) out.push_back(p);
  }
  return out;
}

std::string DatalogInstance::to_text() const {
  std::string s;
  for (const auto& r : rules) s += pretty_print(r) + "\n";
  for (const auto& [p, ts] : facts) {
    for (const auto& t : ts) s += p + to_string(t) + "\n";
  }
  return s;
}

DatalogInstance random_instance(std::mt19937_64& rng, const DatalogGenParams& p) {
  DatalogInstance inst;
  inst.domain = uniform(rng, 1, p.max_domain);
  int npreds = uniform(rng, 2, p.max_preds);
  int nbase = uniform(rng, 1, npreds - 1);
  int nderived = std::min(npreds - nbase, p.max_rules);
  npreds = nbase + nderived;

  std::vector<std::string> names;
  for (int i = 0; i < npreds; ++i) {
    std::string n = "p" + std::to_string(i);
    names.push_back(n);
    inst.arity[n] = uniform(rng, 1, p.max_arity);
    // With negation each derived predicate sits on its own level so that
    // levels chain; without, everything derived is one mutually recursive level.
    inst.level[n] = i < nbase ? 0 : (p.negation ? i - nbase + 1 : 1);
  }

  auto constant = [&] { return RuleTerm{Value::integer(uniform(rng, 0, inst.domain - 1))}; };

  int nrules = std::max(nderived, uniform(rng, 1, p.max_rules));
  for (int r = 0; r < nrules; ++r) {
    const std::string& head = names[nbase + (r < nderived ? r : uniform(rng, 0, nderived - 1))];
    int hl = inst.level[head];
    std::vector<std::string> pos_pool, neg_pool;
    for (const auto& n : names) {
      if (inst.level[n] <= hl) pos_pool.push_back(n);
      if (inst.level[n] < hl) neg_pool.push_back(n);
    }
    ast::Rule rule;
    std::vector<std::string> bound;
    int npos = uniform(rng, 1, 3);
    int nvars = uniform(rng, 1, 4);
    for (int i = 0; i < npos; ++i) {
      const std::string& q = pos_pool[uniform(rng, 0, static_cast<int>(pos_pool.size()) - 1)];
      std::vector<RuleTerm> args;
      for (int k = 0; k < inst.arity[q]; ++k) {
        if (chance(rng, 0.15)) {
          args.push_back(constant());
        } else {
          std::string v = "x" + std::to_string(uniform(rng, 0, nvars - 1));
          if (std::find(bound.begin(), bound.end(), v) == bound.end()) bound.push_back(v);
          args.push_back(LogicVar{v});
        }
      }
      rule.hypotheses.push_back({atom(q, std::move(args)), false});
    }
    auto safe_term = [&]() -> RuleTerm {
      if (bound.empty() || chance(rng, 0.1)) return constant();
      return LogicVar{bound[uniform(rng, 0, static_cast<int>(bound.size()) - 1)]};
    };
    if (p.negation && !neg_pool.empty()) {
      int nneg = uniform(rng, 0, 2);
      for (int i = 0; i < nneg; ++i) {
        const std::string& q = neg_pool[uniform(rng, 0, static_cast<int>(neg_pool.size()) - 1)];
        std::vector<RuleTerm> args;
        for (int k = 0; k < inst.arity[q]; ++k) args.push_back(safe_term());
        rule.hypotheses.push_back({atom(q, std::move(args)), true});
      }
    }
    std::shuffle(rule.hypotheses.begin(), rule.hypotheses.end(), rng);
    std::vector<RuleTerm> hargs;
    for (int k = 0; k < inst.arity[head]; ++k) hargs.push_back(safe_term());
    rule.conclusion = atom(head, std::move(hargs));
    inst.rules.push_back(std::move(rule));
  }

  for (int i = 0; i < nbase; ++i) {
    const std::string& n = names[i];
    std::set<Value, CanonicalLess> tuples;
    int nf = uniform(rng, 0, p.max_facts_per_pred);
    for (int f = 0; f < nf; ++f) {
      std::vector<Value> t;
      for (int k = 0; k < inst.arity[n]; ++k) t.push_back(Value::integer(uniform(rng, 0, inst.domain - 1)));
      tuples.insert(Value::tuple(std::move(t)));
    }
    inst.facts[n] = {tuples.begin(), tuples.end()};
  }
  return inst;
}

datalog::FactStore normalized(datalog::FactStore s) {
  for (auto& [k, v] : s) {
    std::sort(v.begin(), v.end(), CanonicalLess{});
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return s;
}

}  // namespace alda::testing
