#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "alda/ast.hpp"

namespace alda {

struct PredicateInfo {
  ast::PredicateRef ref;
  std::size_t arity = 0;
  bool derived = false;
  bool local() const { return ref.scope == ast::PredicateRef::Scope::Local; }
};

/// A rule set with its predicates classified. Predicates are identified by
/// PredicateRef::key().
struct RuleSetInfo {
  std::string name;
  std::vector<ast::Rule> rules;
  std::map<std::string, PredicateInfo> preds;
  std::set<std::string> base;
  std::set<std::string> derived;
  /// Base predicates each derived predicate transitively depends on.
  std::map<std::string, std::set<std::string>> base_deps;

  bool is_base(const std::string& key) const { return base.contains(key); }
  bool is_derived(const std::string& key) const { return derived.contains(key); }
  const PredicateInfo* find(const std::string& key) const {
    auto it = preds.find(key);
    return it == preds.end() ? nullptr : &it->second;
  }
};

/// Derived = appears in some conclusion; base = everything else.
RuleSetInfo classify_predicates(const ast::RuleSetDef& rs);

/// Edges from hypothesis predicate to conclusion predicate.
struct DependencyGraph {
  std::set<std::string> nodes;
  std::set<std::pair<std::string, std::string>> pos_edges;
  std::set<std::pair<std::string, std::string>> neg_edges;
};

DependencyGraph dependency_graph(const std::vector<ast::Rule>& rules);

/// Everything p depends on, directly or recursively.
std::set<std::string> depends_on(const DependencyGraph& g, const std::string& p);

/// Derived predicates that depend on no base predicate outside `given`.
std::set<std::string> fully_depends(const RuleSetInfo& rs, const std::set<std::string>& given);

/// Derived predicates grouped into strata, lowest first. Negated hypotheses
/// always refer to a strictly lower stratum (or to a base predicate).
/// Throws RuntimeError(StratificationError) when negation occurs in a cycle.
std::vector<std::set<std::string>> stratify(const std::vector<ast::Rule>& rules);

enum class SiteKind { LocalOnly, BaseOfRuleSets, DerivedError, MaybeAliased };

std::string site_kind_name(SiteKind k);

/// One mutation site of a kernel program: an assignment, object creation,
/// infer statement, or set add/del call.
struct UpdateSite {
  const ast::Stmt* stmt = nullptr;
  SourceLoc loc;
  SiteKind kind = SiteKind::LocalOnly;
  std::vector<std::string> rulesets;  // for BaseOfRuleSets
  std::string what;                   // rendering of the mutated target
};

struct UpdateSiteReport {
  std::vector<UpdateSite> sites;
  const UpdateSite* find(const ast::Stmt* s) const;
  bool has_errors() const;
};

/// Classifies every mutation site of a lowered program. Statement pointers
/// refer into `kernel`, which must outlive the report.
UpdateSiteReport classify_update_sites(const ast::Program& kernel);

}  // namespace alda
