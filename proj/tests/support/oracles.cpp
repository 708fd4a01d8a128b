#include "oracles.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>

namespace alda::testing {

using ast::LogicVar;
using ast::RuleTerm;

namespace {

using Tuple = std::vector<std::int64_t>;
using Relation = std::set<Tuple>;
using Model = std::map<std::string, Relation>;

std::vector<std::string> vars_of(const ast::Rule& r) {
  std::vector<std::string> vs;
  auto note = [&](const ast::Atom& a) {
    for (const auto& t : a.args) {
      if (const auto* v = std::get_if<LogicVar>(&t)) {
        if (std::find(vs.begin(), vs.end(), v->name) == vs.end()) vs.push_back(v->name);
      }
    }
  };
  note(r.conclusion);
  for (const auto& h : r.hypotheses) note(h.atom);
  return vs;
}

Tuple ground(const ast::Atom& a, const std::vector<std::string>& vars, const Tuple& env) {
  Tuple t;
  for (const auto& term : a.args) {
    if (const auto* v = std::get_if<LogicVar>(&term)) {
      t.push_back(env[std::find(vars.begin(), vars.end(), v->name) - vars.begin()]);
    } else {
      t.push_back(std::get<Value>(term).as_int());
    }
  }
  return t;
}

/// Calls f for every assignment of `n` variables to 0..d-1.
template <class F>
void for_each_env(std::size_t n, int d, F&& f) {
  Tuple env(n, 0);
  while (true) {
    f(env);
    std::size_t i = 0;
    while (i < n && ++env[i] == d) env[i++] = 0;
    if (i == n) return;
  }
}

Model base_model(const DatalogInstance& inst) {
  Model m;
  for (const auto& [p, l] : inst.level) m[p];
  for (const auto& [p, ts] : inst.facts) {
    for (const auto& t : ts) {
      Tuple g;
      for (const auto& c : t.as_tuple()) g.push_back(c.as_int());
      m[p].insert(g);
    }
  }
  return m;
}

datalog::FactStore to_store(const DatalogInstance& inst, const Model& m) {
  datalog::FactStore out;
  for (const auto& p : inst.derived()) {
    auto& rel = out[p];
    for (const auto& t : m.at(p)) {
      std::vector<Value> vs;
      for (auto c : t) vs.push_back(Value::integer(c));
      rel.push_back(Value::tuple(std::move(vs)));
    }
  }
  return normalized(std::move(out));
}

int max_level(const DatalogInstance& inst) {
  int top = 0;
  for (const auto& [p, l] : inst.level) top = std::max(top, l);
  return top;
}

int head_level(const DatalogInstance& inst, const ast::Rule& r) {
  return inst.level.at(r.conclusion.pred.path[0]);
}

}  // namespace

datalog::FactStore ground_fixpoint(const DatalogInstance& inst) {
  Model m = base_model(inst);
  for (int level = 1; level <= max_level(inst); ++level) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& r : inst.rules) {
        if (head_level(inst, r) != level) continue;
        auto vars = vars_of(r);
        for_each_env(vars.size(), inst.domain, [&](const Tuple& env) {
          for (const auto& h : r.hypotheses) {
            bool holds = m[h.atom.pred.path[0]].contains(ground(h.atom, vars, env));
            if (holds == h.negated) return;
          }
          changed = m[r.conclusion.pred.path[0]].insert(ground(r.conclusion, vars, env)).second || changed;
        });
      }
    }
  }
  return to_store(inst, m);
}

std::optional<datalog::FactStore> enumerate_minimal_model(const DatalogInstance& inst,
                                                          int max_atoms) {
  Model m = base_model(inst);
  for (int level = 1; level <= max_level(inst); ++level) {
    // Index every ground atom of this level's predicates.
    std::vector<std::pair<std::string, Tuple>> atoms;
    std::map<std::pair<std::string, Tuple>, int> index;
    for (const auto& [p, l] : inst.level) {
      if (l != level) continue;
      for_each_env(static_cast<std::size_t>(inst.arity.at(p)), inst.domain, [&](const Tuple& t) {
        index[{p, t}] = static_cast<int>(atoms.size());
        atoms.push_back({p, t});
      });
    }
    if (static_cast<int>(atoms.size()) > max_atoms) return std::nullopt;

    // Ground clauses head <- body, with everything from lower levels decided.
    struct Clause {
      std::uint32_t body;
      int head;
    };
    std::vector<Clause> clauses;
    for (const auto& r : inst.rules) {
      if (head_level(inst, r) != level) continue;
      auto vars = vars_of(r);
      for_each_env(vars.size(), inst.domain, [&](const Tuple& env) {
        std::uint32_t body = 0;
        for (const auto& h : r.hypotheses) {
          const std::string& q = h.atom.pred.path[0];
          Tuple t = ground(h.atom, vars, env);
          if (inst.level.at(q) == level) {
            body |= 1u << index.at({q, t});
          } else if (m[q].contains(t) == h.negated) {
            return;
          }
        }
        clauses.push_back({body, index.at({r.conclusion.pred.path[0], ground(r.conclusion, vars, env)})});
      });
    }

    std::uint32_t n = static_cast<std::uint32_t>(atoms.size());
    std::uint32_t all = n == 32 ? ~0u : (1u << n) - 1;
    std::uint32_t meet = all;
    for (std::uint64_t s = 0; s <= all; ++s) {
      auto cand = static_cast<std::uint32_t>(s);
      bool model = std::all_of(clauses.begin(), clauses.end(), [&](const Clause& c) {
        return (c.body & cand) != c.body || (cand >> c.head & 1u);
      });
      if (model) meet &= cand;
    }
    // The intersection of all models must itself be a model: the least one.
    for (const auto& c : clauses) {
      if ((c.body & meet) == c.body && !(meet >> c.head & 1u)) return std::nullopt;
    }
    for (std::uint32_t i = 0; i < n; ++i) {
      if (meet >> i & 1u) m[atoms[i].first].insert(atoms[i].second);
    }
  }
  return to_store(inst, m);
}

std::set<std::pair<int, int>> floyd_warshall(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
  for (auto [a, b] : edges) r[a][b] = 1;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      if (!r[i][k]) continue;
      for (int j = 0; j < n; ++j) r[i][j] = r[i][j] || r[k][j];
    }
  }
  std::set<std::pair<int, int>> out;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (r[i][j]) out.insert({i, j});
    }
  }
  return out;
}

std::set<std::string> authorized_users(const RbacState& s, const std::string& role) {
  std::set<std::string> out;
  for (const auto& r : s.roles) {
    std::set<std::string> seen{r};
    std::deque<std::string> queue{r};
    while (!queue.empty()) {
      std::string x = queue.front();
      queue.pop_front();
      for (const auto& [a, d] : s.rh) {
        if (a == x && seen.insert(d).second) queue.push_back(d);
      }
    }
    if (!seen.contains(role)) continue;
    for (const auto& [u, held] : s.ur) {
      if (held == r && s.users.contains(u)) out.insert(u);
    }
  }
  return out;
}

}  // namespace alda::testing
