#include "alda/analysis.hpp"

#include <algorithm>
#include <functional>

namespace alda {

using namespace ast;

RuleSetInfo classify_predicates(const RuleSetDef& rs) {
  RuleSetInfo info;
  info.name = rs.name;
  info.rules = rs.rules;
  auto note = [&](const Atom& a, bool derived) {
    auto key = a.pred.key();
    auto [it, fresh] = info.preds.try_emplace(key, PredicateInfo{a.pred, a.args.size(), false});
    if (derived) it->second.derived = true;
  };
  for (const auto& r : rs.rules) {
    note(r.conclusion, true);
    for (const auto& h : r.hypotheses) note(h.atom, false);
  }
  for (const auto& [key, p] : info.preds) (p.derived ? info.derived : info.base).insert(key);

  auto g = dependency_graph(rs.rules);
  for (const auto& d : info.derived) {
    std::set<std::string> bases;
    for (const auto& q : depends_on(g, d)) {
      if (info.base.contains(q)) bases.insert(q);
    }
    info.base_deps.emplace(d, std::move(bases));
  }
  return info;
}

DependencyGraph dependency_graph(const std::vector<Rule>& rules) {
  DependencyGraph g;
  for (const auto& r : rules) {
    auto to = r.conclusion.pred.key();
    g.nodes.insert(to);
    for (const auto& h : r.hypotheses) {
      auto from = h.atom.pred.key();
      g.nodes.insert(from);
      (h.negated ? g.neg_edges : g.pos_edges).emplace(from, to);
    }
  }
  return g;
}

std::set<std::string> depends_on(const DependencyGraph& g, const std::string& p) {
  std::map<std::string, std::vector<std::string>> preds_of;
  for (const auto* edges : {&g.pos_edges, &g.neg_edges}) {
    for (const auto& [from, to] : *edges) preds_of[to].push_back(from);
  }
  std::set<std::string> seen;
  std::vector<std::string> work{p};
  while (!work.empty()) {
    auto cur = std::move(work.back());
    work.pop_back();
    for (const auto& q : preds_of[cur]) {
      if (seen.insert(q).second) work.push_back(q);
    }
  }
  return seen;
}

std::set<std::string> fully_depends(const RuleSetInfo& rs, const std::set<std::string>& given) {
  std::set<std::string> out;
  for (const auto& [d, bases] : rs.base_deps) {
    if (std::includes(given.begin(), given.end(), bases.begin(), bases.end())) out.insert(d);
  }
  return out;
}

std::vector<std::set<std::string>> stratify(const std::vector<Rule>& rules) {
  auto g = dependency_graph(rules);
  std::set<std::string> derived;
  for (const auto& r : rules) derived.insert(r.conclusion.pred.key());

  // Tarjan's SCCs over derived predicates only; bases are sources.
  std::map<std::string, std::vector<std::pair<std::string, bool>>> succ;
  for (const auto& [from, to] : g.pos_edges) succ[from].emplace_back(to, false);
  for (const auto& [from, to] : g.neg_edges) succ[from].emplace_back(to, true);

  std::map<std::string, int> index, low, comp;
  std::vector<std::string> stack;
  std::set<std::string> on_stack;
  int counter = 0;
  int ncomp = 0;
  std::function<void(const std::string&)> connect = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (const auto& [w, neg] : succ[v]) {
      if (!derived.contains(w)) continue;
      if (!index.contains(w)) {
        connect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack.contains(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        comp[w] = ncomp;
      } while (w != v);
      ++ncomp;
    }
  };
  for (const auto& d : derived) {
    if (!index.contains(d)) connect(d);
  }
  for (const auto& [from, to] : g.neg_edges) {
    if (derived.contains(from) && comp.at(from) == comp.at(to)) {
      throw RuntimeError(RuntimeErrorKind::StratificationError,
                         "negation of " + from + " inside a recursive cycle with " + to);
    }
  }

  // Level of a predicate: max over dependencies, +1 across a negation.
  // Tarjan numbers components in reverse topological order, so walk them
  // from the highest number (sources) down.
  std::vector<std::vector<std::string>> members(static_cast<std::size_t>(ncomp));
  for (const auto& [p, c] : comp) members[static_cast<std::size_t>(c)].push_back(p);
  std::map<std::string, int> level;
  std::map<std::string, std::vector<std::pair<std::string, bool>>> preds_of;
  for (const auto& [from, tos] : succ) {
    for (const auto& [to, neg] : tos) preds_of[to].emplace_back(from, neg);
  }
  int max_level = -1;
  for (int c = ncomp - 1; c >= 0; --c) {
    int lv = 0;
    for (const auto& p : members[static_cast<std::size_t>(c)]) {
      for (const auto& [q, neg] : preds_of[p]) {
        if (!derived.contains(q) || comp.at(q) == c) continue;
        lv = std::max(lv, level.at(q) + (neg ? 1 : 0));
      }
    }
    for (const auto& p : members[static_cast<std::size_t>(c)]) level[p] = lv;
    max_level = std::max(max_level, lv);
  }
  std::vector<std::set<std::string>> strata(static_cast<std::size_t>(max_level + 1));
  for (const auto& [p, lv] : level) strata[static_cast<std::size_t>(lv)].insert(p);
  return strata;
}

}  // namespace alda
