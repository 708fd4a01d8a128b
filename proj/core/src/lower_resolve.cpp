// Name-level passes: unique rule set names and identifier resolution.

#include <algorithm>

#include "alda/lowering.hpp"
#include "lower_common.hpp"

namespace alda::lowering {

using namespace ast;
using detail::ClassTable;
using detail::lowering_error;

namespace {

std::string qualified(const std::string& cls, const std::string& rs) { return cls + "." + rs; }

template <class F>
void each_infer_call(Block& b, const F& f) {
  detail::for_all_exprs(b, [&](Expr& e) {
    if (auto* i = std::get_if<ex::Infer>(&e.node)) f(i->call);
  });
  detail::for_all_stmts(b, [&](Stmt& s) {
    if (auto* i = std::get_if<st::Infer>(&s.node)) f(i->call);
  });
}

}  // namespace

Program unique_ruleset_names(Program p) {
  // Unqualified rule set names per class, before renaming.
  std::map<std::string, std::set<std::string>> owned;
  for (auto& c : p.classes) {
    for (auto& rs : c.rulesets) {
      auto prefix = c.name + ".";
      if (rs.name.rfind(prefix, 0) == 0) {
        owned[c.name].insert(rs.name.substr(prefix.size()));
      } else if (rs.name.find('.') == std::string::npos) {
        owned[c.name].insert(rs.name);
        rs.name = qualified(c.name, rs.name);
      }
    }
  }
  ClassTable ct(p);
  for (auto& c : p.classes) {
    auto chain = ct.chain(c.name);
    for (auto& m : c.methods) {
      each_infer_call(m.body, [&](InferCall& call) {
        if (call.ruleset.find('.') != std::string::npos) return;
        if (call.target && !(*call.target)->is<ex::SelfRef>()) return;
        for (const auto& k : chain) {
          if (owned[k].contains(call.ruleset)) {
            call.ruleset = qualified(k, call.ruleset);
            return;
          }
        }
      });
    }
  }
  return p;
}

// ---------------------------------------------------------------------------

namespace {

struct Scope {
  bool top = true;
  std::string cls;
  std::set<std::string> params;
  const std::set<std::string>* fields = nullptr;
  const std::set<std::string>* globals = nullptr;
  std::set<std::string> bound;
};

class Resolver {
 public:
  Resolver(const ClassTable& ct, const std::set<std::string>& global_rulesets)
      : ct_(ct), global_rulesets_(global_rulesets) {}

  std::set<std::string> made_global;
  std::set<std::string> made_local;

  Block block(const Block& b, const Scope& sc) {
    Block out;
    out.reserve(b.size());
    for (const auto& s : b) out.push_back(stmt(s, sc));
    return out;
  }

 private:
  Expr resolve_name(const std::string& x, const Scope& sc, SourceLoc loc) {
    if (sc.bound.contains(x)) return var(x, VarKind::Bound, loc);
    if (!sc.top) {
      if (sc.params.contains(x)) return var(x, VarKind::Param, loc);
      if (sc.fields && sc.fields->contains(x)) return field(mk(ex::SelfRef{}, loc), x, loc);
      if (!(sc.globals && sc.globals->contains(x))) {
        made_local.insert(x);
        return var(x, VarKind::Local, loc);
      }
    }
    made_global.insert(x);
    return global(x, loc);
  }

  Expr target(const Expr& e, const Scope& sc) {
    if (const auto* v = std::get_if<ex::Var>(&e.node)) {
      if (v->kind == VarKind::Bound || (v->kind == VarKind::Unresolved && sc.bound.contains(v->name))) {
        lowering_error("assign-bound", "cannot assign to iteration variable " + v->name, e.loc);
      }
      if (v->kind == VarKind::Param ||
          (v->kind == VarKind::Unresolved && !sc.top && sc.params.contains(v->name))) {
        lowering_error("assign-param", "cannot assign to method parameter " + v->name, e.loc);
      }
      return expr(e, sc);
    }
    if (const auto* t = std::get_if<ex::Tuple>(&e.node)) {
      ex::Tuple out;
      for (const auto& x : t->elems) out.elems.push_back(target(x, sc));
      return mk(std::move(out), e.loc);
    }
    if (e.is<ex::Field>()) return expr(e, sc);
    lowering_error("bad-target", "invalid assignment target", e.loc);
  }

  // Resolves the expressions inside a binder pattern against `before`, then
  // records its variables as bound in `after`.
  Pattern binder(const Pattern& p, const Scope& before, Scope& after) {
    Pattern out = p;
    std::visit(
        [&](auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, pat::Var>) {
            auto& v = n.var->template as<ex::Var>();
            if (v.kind == VarKind::Unresolved) v.kind = VarKind::Bound;
            after.bound.insert(v.name);
          } else if constexpr (std::is_same_v<T, pat::Bound>) {
            *n.var = expr(*n.var, before);
          } else if constexpr (std::is_same_v<T, pat::Const>) {
            *n.expr = expr(*n.expr, before);
          } else if constexpr (std::is_same_v<T, pat::Tuple>) {
            for (auto& x : n.elems) x = binder(x, before, after);
          }
        },
        out.node);
    return out;
  }

  // ifSome / whileSome patterns assign ordinary variables.
  Pattern target_pattern(const Pattern& p, const Scope& sc) {
    Pattern out = p;
    std::visit(
        [&](auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, pat::Var>) {
            *n.var = target(*n.var, sc);
          } else if constexpr (std::is_same_v<T, pat::Bound>) {
            *n.var = expr(*n.var, sc);
          } else if constexpr (std::is_same_v<T, pat::Const>) {
            *n.expr = expr(*n.expr, sc);
          } else if constexpr (std::is_same_v<T, pat::Tuple>) {
            for (auto& x : n.elems) x = target_pattern(x, sc);
          }
        },
        out.node);
    return out;
  }

  std::vector<Iterator> binder_iters(const std::vector<Iterator>& iters, Scope& sc) {
    std::vector<Iterator> out;
    for (const auto& it : iters) {
      Expr dom = expr(*it.domain, sc);
      Scope before = sc;
      Pattern pat = binder(*it.pattern, before, sc);
      out.push_back(Iterator{std::move(pat), std::move(dom)});
    }
    return out;
  }

  void infer_call(InferCall& call, const Scope& sc, SourceLoc loc) {
    if (call.target) {
      **call.target = expr(**call.target, sc);
    } else if (call.ruleset.find('.') != std::string::npos) {
      if (sc.top) lowering_error("unknown-ruleset", "no rule set " + call.ruleset, loc);
      call.target = Box<Expr>(mk(ex::SelfRef{}, loc));
    } else {
      if (!global_rulesets_.contains(call.ruleset)) {
        lowering_error("unknown-ruleset", "no rule set named " + call.ruleset, loc);
      }
      call.ruleset = qualified(kGlobalsClass, call.ruleset);
      call.target = Box<Expr>(mk(ex::GlobalsRef{}, loc));
    }
    for (auto& q : call.queries) {
      if (!q.args) continue;
      for (auto& a : *q.args) {
        if (auto* b = std::get_if<QueryArg::BoundVar>(&a.node)) *b->var = expr(*b->var, sc);
      }
    }
    for (auto& kw : call.kwargs) *kw.value = expr(*kw.value, sc);
  }

  void check_class(const std::string& name, SourceLoc loc) {
    if (name == kSetClass || name == kSequenceClass) return;
    if (!ct_.find(name)) lowering_error("unknown-class", "no class named " + name, loc);
  }

 public:
  Expr expr(const Expr& e, const Scope& sc) {
    if (const auto* v = std::get_if<ex::Var>(&e.node)) {
      if (v->kind != VarKind::Unresolved) return e;
      return resolve_name(v->name, sc, e.loc);
    }
    if (e.is<ex::SelfRef>() && sc.top) {
      lowering_error("self-outside-method", "self used outside a method", e.loc);
    }
    Expr out = e;
    if (auto* q = std::get_if<ex::Quant>(&out.node)) {
      Scope inner = sc;
      q->iters = binder_iters(q->iters, inner);
      *q->cond = expr(*q->cond, inner);
      return out;
    }
    if (auto* c = std::get_if<ex::Comprehension>(&out.node)) {
      Scope inner = sc;
      c->iters = binder_iters(c->iters, inner);
      if (c->cond) **c->cond = expr(**c->cond, inner);
      *c->elem = expr(*c->elem, inner);
      return out;
    }
    if (auto* i = std::get_if<ex::Infer>(&out.node)) {
      infer_call(i->call, sc, e.loc);
      return out;
    }
    if (auto* n = std::get_if<ex::New>(&out.node)) check_class(n->class_name, e.loc);
    if (auto* c = std::get_if<ex::Call>(&out.node); c && c->kind == CallKind::Implicit) {
      if (sc.top) lowering_error("unknown-function", "no function named " + c->method, e.loc);
      bool found = false;
      for (const auto& k : ct_.family(sc.cls)) found = found || ct_.method(k, c->method);
      if (!found) lowering_error("unknown-method", "no method named " + c->method, e.loc);
      c->kind = CallKind::Method;
      c->target = Box<Expr>(mk(ex::SelfRef{}, e.loc));
    }
    if (auto* c = std::get_if<ex::Call>(&out.node); c && c->kind == CallKind::Super && sc.top) {
      lowering_error("super-outside-method", "super used outside a method", e.loc);
    }
    detail::for_each_child(out, [&](Expr& c) { c = expr(c, sc); });
    return out;
  }

  Stmt stmt(const Stmt& s, const Scope& sc) {
    Stmt out = s;
    std::visit(
        [&](auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, st::Assign>) {
            n.value = expr(n.value, sc);
            n.target = target(n.target, sc);
          } else if constexpr (std::is_same_v<T, st::NewObj>) {
            check_class(n.class_name, s.loc);
            n.target = target(n.target, sc);
          } else if constexpr (std::is_same_v<T, st::Infer>) {
            infer_call(n.call, sc, s.loc);
            for (auto& t : n.targets) t = target(t, sc);
          } else if constexpr (std::is_same_v<T, st::If>) {
            n.cond = expr(n.cond, sc);
            n.then_body = block(n.then_body, sc);
            if (n.else_body) *n.else_body = block(*n.else_body, sc);
          } else if constexpr (std::is_same_v<T, st::While>) {
            n.cond = expr(n.cond, sc);
            n.body = block(n.body, sc);
          } else if constexpr (std::is_same_v<T, st::For>) {
            n.domain = expr(n.domain, sc);
            Scope inner = sc;
            n.pattern = binder(n.pattern, sc, inner);
            n.body = block(n.body, inner);
          } else if constexpr (std::is_same_v<T, st::IfSome> || std::is_same_v<T, st::WhileSome>) {
            for (auto& it : n.iters) {
              *it.domain = expr(*it.domain, sc);
              *it.pattern = target_pattern(*it.pattern, sc);
            }
            n.cond = expr(n.cond, sc);
            n.body = block(n.body, sc);
          } else if constexpr (std::is_same_v<T, st::ExprStmt>) {
            n.expr = expr(n.expr, sc);
          } else if constexpr (std::is_same_v<T, st::Return>) {
            if (sc.top) lowering_error("return-outside-method", "return outside a method", s.loc);
            if (n.value) *n.value = expr(*n.value, sc);
          }
        },
        out.node);
    return out;
  }

 private:
  const ClassTable& ct_;
  const std::set<std::string>& global_rulesets_;
};

// Predicate names a rule set mentions: self.f fields, and bare roots.
void ruleset_names(const RuleSetDef& rs, std::set<std::string>& self_fields,
                   std::set<std::string>& bare_roots) {
  auto atom = [&](const Atom& a) {
    if (a.pred.scope != PredicateRef::Scope::Unresolved) return;
    if (a.pred.path.front() == "self") {
      if (a.pred.path.size() > 1) self_fields.insert(a.pred.path[1]);
    } else {
      bare_roots.insert(a.pred.path.front());
    }
  };
  for (const auto& r : rs.rules) {
    atom(r.conclusion);
    for (const auto& h : r.hypotheses) atom(h.atom);
  }
}

void resolve_ruleset(RuleSetDef& rs, bool class_scope, const std::set<std::string>& fields,
                     const std::set<std::string>& globals) {
  std::set<std::string> derived;
  for (const auto& r : rs.rules) {
    if (r.conclusion.pred.scope == PredicateRef::Scope::Unresolved) {
      derived.insert(r.conclusion.pred.key());
    }
  }
  auto resolve = [&](Atom& a) {
    auto& ref = a.pred;
    if (ref.scope != PredicateRef::Scope::Unresolved) return;
    bool is_derived = derived.contains(ref.key());
    const auto& root = ref.path.front();
    if (root == "self") {
      if (!class_scope) lowering_error("self-in-global-rules", "self in a global rule set", a.loc);
      ref.path.erase(ref.path.begin());
      ref.scope = PredicateRef::Scope::Self;
    } else if (class_scope && fields.contains(root)) {
      ref.scope = PredicateRef::Scope::Self;
    } else if (globals.contains(root)) {
      ref.scope = PredicateRef::Scope::Global;
      if (class_scope && is_derived) {
        lowering_error("derived-global", "derived predicate " + root + " of a class rule set is a global variable", a.loc);
      }
    } else if (ref.path.size() == 1) {
      ref.scope = PredicateRef::Scope::Local;
    } else {
      lowering_error("unknown-chain-root", root + " is neither a field nor a global variable", a.loc);
    }
    if (is_derived && ref.is_chain() && !(ref.scope == PredicateRef::Scope::Self && ref.path.size() == 1)) {
      lowering_error("derived-chain", "derived predicate " + a.pred.key() + " must be a variable or a field of self", a.loc);
    }
  };
  for (auto& r : rs.rules) {
    resolve(r.conclusion);
    for (auto& h : r.hypotheses) resolve(h.atom);
  }
}

}  // namespace

Program globals_to_fields(Program p, const std::vector<std::string>& extra_globals) {
  ClassTable ct(p);
  std::set<std::string> global_rulesets;
  for (const auto& rs : p.rulesets) global_rulesets.insert(rs.name);
  if (const auto* g = ct.find(kGlobalsClass)) {
    for (const auto& rs : g->rulesets) {
      global_rulesets.insert(rs.name.substr(std::string(kGlobalsClass).size() + 1));
    }
  }

  // Top level: every free name is a global variable.
  std::set<std::string> globals(extra_globals.begin(), extra_globals.end());
  {
    Resolver r(ct, global_rulesets);
    Scope sc;
    p.top = r.block(p.top, sc);
    globals.insert(r.made_global.begin(), r.made_global.end());
  }

  // Per class: self.f fields written anywhere, and names read bare in methods.
  std::map<std::string, std::set<std::string>> self_fields, bare_reads, rule_roots;
  for (const auto& c : p.classes) {
    auto& sf = self_fields[c.name];
    for (const auto& rs : c.rulesets) ruleset_names(rs, sf, rule_roots[c.name]);
    for (const auto& m : c.methods) {
      detail::visit_exprs(m.body, [&](const Expr& e) {
        if (const auto* f = std::get_if<ex::Field>(&e.node); f && f->object->is<ex::SelfRef>()) {
          sf.insert(f->name);
        }
      });
      Resolver dry(ct, global_rulesets);
      Scope sc;
      sc.top = false;
      sc.cls = c.name;
      sc.params.insert(m.params.begin(), m.params.end());
      static const std::set<std::string> none;
      sc.fields = &none;
      sc.globals = &none;
      try {
        (void)dry.block(m.body, sc);
      } catch (const CompileError&) {
        // Reported by the real resolution below.
      }
      bare_reads[c.name].insert(dry.made_local.begin(), dry.made_local.end());
    }
  }

  // A rule-set predicate read as a field of any object is a field too.
  std::set<std::string> field_names;
  auto note_fields = [&](const Block& b) {
    detail::visit_exprs(b, [&](const Expr& e) {
      if (const auto* f = std::get_if<ex::Field>(&e.node)) field_names.insert(f->name);
    });
  };
  note_fields(p.top);
  for (const auto& c : p.classes) {
    for (const auto& m : c.methods) note_fields(m.body);
  }

  std::map<std::string, std::set<std::string>> fields_of;
  for (const auto& c : p.classes) {
    std::set<std::string> fields, roots, reads;
    for (const auto& k : ct.family(c.name)) {
      fields.insert(self_fields[k].begin(), self_fields[k].end());
      roots.insert(rule_roots[k].begin(), rule_roots[k].end());
      reads.insert(bare_reads[k].begin(), bare_reads[k].end());
    }
    for (const auto& r : roots) {
      if (reads.contains(r) || field_names.contains(r)) fields.insert(r);
    }
    fields_of[c.name] = std::move(fields);
  }

  for (auto& c : p.classes) {
    const auto& fields = fields_of[c.name];
    for (auto& m : c.methods) {
      Resolver r(ct, global_rulesets);
      Scope sc;
      sc.top = false;
      sc.cls = c.name;
      sc.params.insert(m.params.begin(), m.params.end());
      sc.fields = &fields;
      sc.globals = &globals;
      m.body = r.block(m.body, sc);
    }
    for (auto& rs : c.rulesets) resolve_ruleset(rs, true, fields, globals);
  }

  if (!p.rulesets.empty()) {
    auto it = std::find_if(p.classes.begin(), p.classes.end(),
                           [](const ClassDef& c) { return c.name == kGlobalsClass; });
    if (it == p.classes.end()) {
      p.classes.push_back(ClassDef{kGlobalsClass, std::nullopt, {}, {}, {}});
      it = std::prev(p.classes.end());
    }
    for (auto& rs : p.rulesets) {
      resolve_ruleset(rs, false, {}, globals);
      auto to_self = [](Atom& a) {
        if (a.pred.scope == PredicateRef::Scope::Global) a.pred.scope = PredicateRef::Scope::Self;
      };
      for (auto& rule : rs.rules) {
        to_self(rule.conclusion);
        for (auto& h : rule.hypotheses) to_self(h.atom);
      }
      rs.name = qualified(kGlobalsClass, rs.name);
      it->rulesets.push_back(std::move(rs));
    }
    p.rulesets.clear();
  }
  return p;
}

std::vector<std::string> global_names(const Program& lowered) {
  std::set<std::string> names;
  auto note = [&](const Expr& e) {
    if (const auto* f = std::get_if<ex::Field>(&e.node); f && f->object->is<ex::GlobalsRef>()) {
      names.insert(f->name);
    }
  };
  for (const auto& c : lowered.classes) {
    for (const auto& m : c.methods) detail::visit_exprs(m.body, note);
    for (const auto& rs : c.rulesets) {
      auto atom = [&](const Atom& a) {
        bool globals_obj = c.name == kGlobalsClass && a.pred.scope == PredicateRef::Scope::Self;
        if (a.pred.scope == PredicateRef::Scope::Global || globals_obj) {
          names.insert(a.pred.path.front());
        }
      };
      for (const auto& r : rs.rules) {
        atom(r.conclusion);
        for (const auto& h : r.hypotheses) atom(h.atom);
      }
    }
  }
  detail::visit_exprs(lowered.top, note);
  return {names.begin(), names.end()};
}

}  // namespace alda::lowering
