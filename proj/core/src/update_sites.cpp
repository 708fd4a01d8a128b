#include <algorithm>
#include <map>
#include <set>

#include "alda/analysis.hpp"
#include "alda/parser.hpp"
#include "lower_common.hpp"

namespace alda {

using namespace ast;

std::string site_kind_name(SiteKind k) {
  switch (k) {
    case SiteKind::LocalOnly: return "LocalOnly";
    case SiteKind::BaseOfRuleSets: return "BaseOfRuleSets";
    case SiteKind::DerivedError: return "DerivedError";
    case SiteKind::MaybeAliased: return "MaybeAliased";
  }
  return "?";
}

const UpdateSite* UpdateSiteReport::find(const Stmt* s) const {
  auto it = std::lower_bound(sites.begin(), sites.end(), s,
                             [](const UpdateSite& u, const Stmt* p) { return u.stmt < p; });
  return it != sites.end() && it->stmt == s ? &*it : nullptr;
}

bool UpdateSiteReport::has_errors() const {
  return std::any_of(sites.begin(), sites.end(),
                     [](const UpdateSite& u) { return u.kind == SiteKind::DerivedError; });
}

namespace {

class Classifier {
 public:
  explicit Classifier(const Program& p) : ct_(p) {
    for (const auto& c : p.classes) {
      for (const auto& rs : c.rulesets) {
        RuleSetInfo info = classify_predicates(rs);
        rulesets_of_[c.name].push_back(rs.name);
        for (const auto& [key, pi] : info.preds) {
          const auto& path = pi.ref.path;
          if (pi.local() || path.empty()) continue;
          bool globals_obj = c.name == kGlobalsClass;
          if (pi.derived) {
            if (pi.ref.scope == PredicateRef::Scope::Self && path.size() == 1) {
              derived_self_[c.name].insert(path[0]);
              derived_any_.insert(path[0]);
            }
          } else {
            // Every field along the chain can change what the chain reaches.
            for (std::size_t i = 0; i < path.size(); ++i) {
              bool gv_field = i == 0 && (pi.ref.scope == PredicateRef::Scope::Global || globals_obj);
              auto& sink = gv_field ? global_base_ : field_base_;
              auto& list = sink[path[i]];
              if (std::find(list.begin(), list.end(), rs.name) == list.end()) list.push_back(rs.name);
            }
          }
        }
      }
    }
  }

  UpdateSiteReport run(const Program& p) {
    for (const auto& c : p.classes) {
      cls_ = c.name;
      for (const auto& m : c.methods) walk(m.body);
    }
    cls_.clear();
    walk(p.top);
    std::sort(report_.sites.begin(), report_.sites.end(),
              [](const UpdateSite& a, const UpdateSite& b) { return a.stmt < b.stmt; });
    return std::move(report_);
  }

 private:
  struct Verdict {
    SiteKind kind = SiteKind::LocalOnly;
    std::vector<std::string> rulesets;
  };

  static void join(Verdict& v, const Verdict& w) {
    auto rank = [](SiteKind k) {
      switch (k) {
        case SiteKind::LocalOnly: return 0;
        case SiteKind::BaseOfRuleSets: return 1;
        case SiteKind::MaybeAliased: return 2;
        case SiteKind::DerivedError: return 3;
      }
      return 0;
    };
    for (const auto& r : w.rulesets) {
      if (std::find(v.rulesets.begin(), v.rulesets.end(), r) == v.rulesets.end()) {
        v.rulesets.push_back(r);
      }
    }
    if (rank(w.kind) > rank(v.kind)) v.kind = w.kind;
  }

  /// Rule sets carried by objects of class `c`: its own and its ancestors'.
  std::vector<std::string> chain_rulesets(const std::string& c) const {
    std::vector<std::string> out;
    for (const auto& k : ct_.chain(c)) {
      auto it = rulesets_of_.find(k);
      if (it != rulesets_of_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    }
    return out;
  }

  bool derived_in_chain(const std::string& c, const std::string& f) const {
    for (const auto& k : ct_.chain(c)) {
      auto it = derived_self_.find(k);
      if (it != derived_self_.end() && it->second.contains(f)) return true;
    }
    return false;
  }

  Verdict base_of(const std::map<std::string, std::vector<std::string>>& m,
                  const std::string& f) const {
    auto it = m.find(f);
    if (it == m.end()) return {};
    return {SiteKind::BaseOfRuleSets, it->second};
  }

  /// Writing a new value into `target`.
  Verdict write_target(const Expr& target) const {
    if (target.is<ex::Var>()) return {};
    if (!target.is<ex::Field>()) return {SiteKind::MaybeAliased, {}};
    const auto& f = target.as<ex::Field>();
    const Expr& obj = *f.object;
    if (obj.is<ex::GlobalsRef>()) {
      if (derived_in_chain(kGlobalsClass, f.name)) return {SiteKind::DerivedError, {}};
      return base_of(global_base_, f.name);
    }
    if (obj.is<ex::SelfRef>() && !cls_.empty()) {
      auto& fb = cls_ == kGlobalsClass ? global_base_ : field_base_;
      if (derived_in_chain(cls_, f.name)) return {SiteKind::DerivedError, {}};
      if (derived_any_.contains(f.name)) return {SiteKind::MaybeAliased, {}};
      return base_of(fb, f.name);
    }
    if (derived_any_.contains(f.name)) return {SiteKind::MaybeAliased, {}};
    return base_of(field_base_, f.name);
  }

  /// Mutating the set that `receiver` evaluates to. Sets are shared by
  /// reference, so anything but a provable base or derived field may alias.
  Verdict mutate_set(const Expr& receiver) const {
    if (receiver.is<ex::Field>()) {
      const auto& f = receiver.as<ex::Field>();
      const Expr& obj = *f.object;
      bool gv = obj.is<ex::GlobalsRef>() || (obj.is<ex::SelfRef>() && cls_ == kGlobalsClass);
      if (gv) {
        if (derived_in_chain(kGlobalsClass, f.name)) return {SiteKind::DerivedError, {}};
      } else if (obj.is<ex::SelfRef>() && !cls_.empty() && derived_in_chain(cls_, f.name)) {
        return {SiteKind::DerivedError, {}};
      }
    }
    return {SiteKind::MaybeAliased, {}};
  }

  void walk(const Block& b) {
    for (const auto& s : b) {
      visit(s);
      detail::for_each_block(s, [&](const Block& inner) { walk(inner); });
    }
  }

  static bool is_set_mutation(const Expr& e) {
    if (!e.is<ex::Call>()) return false;
    const auto& c = e.as<ex::Call>();
    return c.kind == CallKind::Method && c.target && (c.method == "add" || c.method == "del");
  }

  void visit(const Stmt& s) {
    Verdict v;
    std::string what;
    bool site = false;
    if (const auto* a = std::get_if<st::Assign>(&s.node)) {
      v = write_target(a->target);
      what = pretty_print(a->target);
      site = true;
    } else if (const auto* n = std::get_if<st::NewObj>(&s.node)) {
      v = write_target(n->target);
      auto rs = chain_rulesets(n->class_name);
      if (!rs.empty()) join(v, {SiteKind::BaseOfRuleSets, rs});
      what = pretty_print(n->target);
      site = true;
    } else if (const auto* inf = std::get_if<st::Infer>(&s.node)) {
      v = {SiteKind::BaseOfRuleSets, {inf->call.ruleset}};
      for (const auto& t : inf->targets) {
        join(v, write_target(t));
        what += (what.empty() ? "" : ", ") + pretty_print(t);
      }
      if (what.empty()) what = "infer";
      site = true;
    }
    const Expr* direct = nullptr;
    if (const auto* es = std::get_if<st::ExprStmt>(&s.node); es && is_set_mutation(es->expr)) {
      direct = &es->expr;
      const auto& c = direct->as<ex::Call>();
      v = mutate_set(**c.target);
      what = pretty_print(**c.target) + "." + c.method;
      site = true;
    }
    // add/del nested inside a larger expression: the receiver is unknown.
    bool nested = false;
    detail::for_each_stmt_expr(s, [&](const Expr& top) {
      nested = nested || detail::any_expr(top, [&](const Expr& e) {
                 return is_set_mutation(e) && &e != direct;
               });
    });
    if (nested) {
      join(v, {SiteKind::MaybeAliased, {}});
      if (what.empty()) what = "set mutation";
      site = true;
    }
    if (site) report_.sites.push_back(UpdateSite{&s, s.loc, v.kind, std::move(v.rulesets), what});
  }

  detail::ClassTable ct_;
  std::map<std::string, std::vector<std::string>> rulesets_of_;
  std::map<std::string, std::set<std::string>> derived_self_;
  std::set<std::string> derived_any_;
  std::map<std::string, std::vector<std::string>> field_base_;
  std::map<std::string, std::vector<std::string>> global_base_;
  std::string cls_;
  UpdateSiteReport report_;
};

}  // namespace

UpdateSiteReport classify_update_sites(const Program& kernel) {
  return Classifier(kernel).run(kernel);
}

}  // namespace alda
