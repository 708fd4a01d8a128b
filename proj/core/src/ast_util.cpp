#include "ast_util.hpp"

#include <algorithm>
#include <charconv>

namespace alda::detail {

using namespace ast;

namespace {

template <class E, class F>
void children_impl(E& e, const F& f) {
  std::visit(
      [&](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ex::Field>) {
          f(*n.object);
        } else if constexpr (std::is_same_v<T, ex::Tuple> || std::is_same_v<T, ex::SetLit>) {
          for (auto& x : n.elems) f(x);
        } else if constexpr (std::is_same_v<T, ex::Unary> || std::is_same_v<T, ex::Aggregate> ||
                             std::is_same_v<T, ex::IsInstance>) {
          f(*n.operand);
        } else if constexpr (std::is_same_v<T, ex::Binary>) {
          f(*n.lhs);
          f(*n.rhs);
        } else if constexpr (std::is_same_v<T, ex::Quant>) {
          for (auto& it : n.iters) {
            for_each_pattern_expr(*it.pattern, f);
            f(*it.domain);
          }
          f(*n.cond);
        } else if constexpr (std::is_same_v<T, ex::Comprehension>) {
          for (auto& it : n.iters) {
            for_each_pattern_expr(*it.pattern, f);
            f(*it.domain);
          }
          if (n.cond) f(**n.cond);
          f(*n.elem);
        } else if constexpr (std::is_same_v<T, ex::Call>) {
          if (n.target) f(**n.target);
          for (auto& a : n.args) f(a);
        } else if constexpr (std::is_same_v<T, ex::Infer>) {
          if (n.call.target) f(**n.call.target);
          for (auto& q : n.call.queries) {
            if (!q.args) continue;
            for (auto& a : *q.args) {
              if (auto* b = std::get_if<QueryArg::BoundVar>(&a.node)) f(*b->var);
            }
          }
          for (auto& kw : n.call.kwargs) f(*kw.value);
        } else if constexpr (std::is_same_v<T, ex::New>) {
          if (n.setup_args) {
            for (auto& a : *n.setup_args) f(a);
          }
        }
      },
      e.node);
}

template <class P, class F>
void pattern_impl(P& p, const F& f) {
  std::visit(
      [&](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, pat::Var> || std::is_same_v<T, pat::Bound>) {
          f(*n.var);
        } else if constexpr (std::is_same_v<T, pat::Const>) {
          f(*n.expr);
        } else if constexpr (std::is_same_v<T, pat::Tuple>) {
          for (auto& x : n.elems) pattern_impl(x, f);
        }
      },
      p.node);
}

template <class C, class F>
void infer_call_exprs(C& call, const F& f) {
  if (call.target) f(**call.target);
  for (auto& q : call.queries) {
    if (!q.args) continue;
    for (auto& a : *q.args) {
      if (auto* b = std::get_if<QueryArg::BoundVar>(&a.node)) f(*b->var);
    }
  }
  for (auto& kw : call.kwargs) f(*kw.value);
}

template <class S, class F>
void stmt_impl(S& s, const F& f) {
  std::visit(
      [&](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, st::Assign>) {
          f(n.target);
          f(n.value);
        } else if constexpr (std::is_same_v<T, st::NewObj>) {
          f(n.target);
        } else if constexpr (std::is_same_v<T, st::Infer>) {
          for (auto& t : n.targets) f(t);
          infer_call_exprs(n.call, f);
        } else if constexpr (std::is_same_v<T, st::If> || std::is_same_v<T, st::While>) {
          f(n.cond);
        } else if constexpr (std::is_same_v<T, st::For>) {
          pattern_impl(n.pattern, f);
          f(n.domain);
        } else if constexpr (std::is_same_v<T, st::IfSome> || std::is_same_v<T, st::WhileSome>) {
          for (auto& it : n.iters) {
            pattern_impl(*it.pattern, f);
            f(*it.domain);
          }
          f(n.cond);
        } else if constexpr (std::is_same_v<T, st::ExprStmt>) {
          f(n.expr);
        } else if constexpr (std::is_same_v<T, st::Return>) {
          if (n.value) f(*n.value);
        }
      },
      s.node);
}

template <class S, class F>
void blocks_impl(S& s, const F& f) {
  std::visit(
      [&](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, st::If>) {
          f(n.then_body);
          if (n.else_body) f(*n.else_body);
        } else if constexpr (std::is_same_v<T, st::For> || std::is_same_v<T, st::While> ||
                             std::is_same_v<T, st::IfSome> || std::is_same_v<T, st::WhileSome>) {
          f(n.body);
        }
      },
      s.node);
}

}  // namespace

void for_each_child(Expr& e, const ExprFn& f) { children_impl(e, f); }
void for_each_child(const Expr& e, const ConstExprFn& f) { children_impl(e, f); }
void for_each_pattern_expr(Pattern& p, const ExprFn& f) { pattern_impl(p, f); }
void for_each_pattern_expr(const Pattern& p, const ConstExprFn& f) { pattern_impl(p, f); }
void for_each_stmt_expr(Stmt& s, const ExprFn& f) { stmt_impl(s, f); }
void for_each_stmt_expr(const Stmt& s, const ConstExprFn& f) { stmt_impl(s, f); }
void for_each_block(Stmt& s, const std::function<void(Block&)>& f) { blocks_impl(s, f); }
void for_each_block(const Stmt& s, const std::function<void(const Block&)>& f) {
  blocks_impl(s, f);
}

void visit_exprs(const Expr& e, const ConstExprFn& f) {
  f(e);
  for_each_child(e, [&](const Expr& c) { visit_exprs(c, f); });
}

void visit_stmts(const Block& b, const std::function<void(const Stmt&)>& f) {
  for (const auto& s : b) {
    f(s);
    for_each_block(s, [&](const Block& inner) { visit_stmts(inner, f); });
  }
}

void visit_exprs(const Block& b, const ConstExprFn& f) {
  visit_stmts(b, [&](const Stmt& s) {
    for_each_stmt_expr(s, [&](const Expr& e) { visit_exprs(e, f); });
  });
}

bool any_expr(const Expr& e, const std::function<bool(const Expr&)>& pred) {
  bool found = false;
  visit_exprs(e, [&](const Expr& x) { found = found || pred(x); });
  return found;
}

void pattern_vars(const Pattern& p, std::vector<Expr>& out) {
  if (const auto* v = std::get_if<pat::Var>(&p.node)) {
    if (std::find(out.begin(), out.end(), *v->var) == out.end()) out.push_back(*v->var);
  } else if (const auto* t = std::get_if<pat::Tuple>(&p.node)) {
    for (const auto& x : t->elems) pattern_vars(x, out);
  }
}

// ---------------------------------------------------------------------------

namespace {

std::size_t dollar_suffix(const std::string& s) {
  auto pos = s.rfind('$');
  if (pos == std::string::npos) return 0;
  std::size_t n = 0;
  auto* first = s.data() + pos + 1;
  auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, n);
  return (ec == std::errc() && ptr == last) ? n : 0;
}

void note_expr_ids(const Expr& e, std::set<std::string>& out) {
  visit_exprs(e, [&](const Expr& x) {
    if (const auto* v = std::get_if<ex::Var>(&x.node)) out.insert(v->name);
    if (const auto* f = std::get_if<ex::Field>(&x.node)) out.insert(f->name);
    if (const auto* c = std::get_if<ex::Call>(&x.node)) out.insert(c->method);
    if (const auto* n = std::get_if<ex::New>(&x.node)) out.insert(n->class_name);
    if (const auto* i = std::get_if<ex::Infer>(&x.node)) {
      out.insert(i->call.ruleset);
      for (const auto& q : i->call.queries) {
        out.insert(q.predicate);
        if (!q.args) continue;
        for (const auto& a : *q.args) {
          if (const auto* fv = std::get_if<QueryArg::FreeVar>(&a.node)) out.insert(fv->name);
        }
      }
      for (const auto& kw : i->call.kwargs) out.insert(kw.name);
    }
  });
}

void note_block_ids(const Block& b, std::set<std::string>& out) {
  visit_stmts(b, [&](const Stmt& s) {
    for_each_stmt_expr(s, [&](const Expr& e) { note_expr_ids(e, out); });
    if (const auto* n = std::get_if<st::NewObj>(&s.node)) out.insert(n->class_name);
    if (const auto* i = std::get_if<st::Infer>(&s.node)) {
      out.insert(i->call.ruleset);
      for (const auto& q : i->call.queries) {
        out.insert(q.predicate);
        if (!q.args) continue;
        for (const auto& a : *q.args) {
          if (const auto* fv = std::get_if<QueryArg::FreeVar>(&a.node)) out.insert(fv->name);
        }
      }
      for (const auto& kw : i->call.kwargs) out.insert(kw.name);
    }
  });
}

void note_ruleset_ids(const RuleSetDef& rs, std::set<std::string>& out) {
  out.insert(rs.name);
  auto atom = [&](const Atom& a) {
    for (const auto& p : a.pred.path) out.insert(p);
    for (const auto& t : a.args) {
      if (const auto* v = std::get_if<LogicVar>(&t)) out.insert(v->name);
    }
  };
  for (const auto& r : rs.rules) {
    atom(r.conclusion);
    for (const auto& h : r.hypotheses) atom(h.atom);
  }
}

}  // namespace

std::set<std::string> all_identifiers(const Program& p) {
  std::set<std::string> out;
  for (const auto& rs : p.rulesets) note_ruleset_ids(rs, out);
  for (const auto& c : p.classes) {
    out.insert(c.name);
    if (c.base) out.insert(*c.base);
    for (const auto& rs : c.rulesets) note_ruleset_ids(rs, out);
    for (const auto& m : c.methods) {
      out.insert(m.name);
      for (const auto& prm : m.params) out.insert(prm);
      note_block_ids(m.body, out);
    }
  }
  note_block_ids(p.top, out);
  return out;
}

FreshNames::FreshNames(const Program& p) {
  for (const auto& id : all_identifiers(p)) next_ = std::max(next_, dollar_suffix(id) + 1);
}

std::string FreshNames::fresh(std::string_view base) {
  return std::string(base) + "$" + std::to_string(next_++);
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

bool is_bound_var(const Expr& e, const std::string& name) {
  const auto* v = std::get_if<ex::Var>(&e.node);
  return v && v->kind == VarKind::Bound && v->name == name;
}

// Drop keys shadowed by the binders of `p`.
Subst shadow(const Subst& theta, const Pattern& p) {
  std::vector<Expr> vars;
  pattern_vars(p, vars);
  Subst out;
  for (const auto& kv : theta) {
    bool hidden = std::any_of(vars.begin(), vars.end(), [&](const Expr& v) {
      const auto* bv = std::get_if<ex::Var>(&v.node);
      return bv && bv->kind == VarKind::Bound && is_bound_var(kv.first, bv->name);
    });
    if (!hidden) out.push_back(kv);
  }
  return out;
}

void subst_iters(std::vector<Iterator>& iters, Subst& theta) {
  for (auto& it : iters) {
    *it.domain = substitute(*it.domain, theta);
    // Binders themselves are not rewritten; =x and constants inside are.
    *it.pattern = substitute(*it.pattern, theta);
    theta = shadow(theta, *it.pattern);
  }
}

}  // namespace

Pattern substitute(const Pattern& p, const Subst& theta) {
  Pattern out = p;
  std::visit(
      [&](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, pat::Bound>) {
          *n.var = substitute(*n.var, theta);
        } else if constexpr (std::is_same_v<T, pat::Const>) {
          *n.expr = substitute(*n.expr, theta);
        } else if constexpr (std::is_same_v<T, pat::Tuple>) {
          for (auto& x : n.elems) x = substitute(x, theta);
        } else if constexpr (std::is_same_v<T, pat::Var>) {
          // A non-binder pattern variable (ifSome) is an ordinary target.
          const auto* v = std::get_if<ex::Var>(&n.var->node);
          if (!(v && v->kind == VarKind::Bound)) *n.var = substitute(*n.var, theta);
        }
      },
      out.node);
  return out;
}

Expr substitute(const Expr& e, const Subst& theta) {
  if (theta.empty()) return e;
  for (const auto& [from, to] : theta) {
    if (e == from) {
      Expr r = to;
      r.loc = e.loc;
      return r;
    }
  }
  Expr out = e;
  if (auto* q = std::get_if<ex::Quant>(&out.node)) {
    Subst inner = theta;
    subst_iters(q->iters, inner);
    *q->cond = substitute(*q->cond, inner);
    return out;
  }
  if (auto* c = std::get_if<ex::Comprehension>(&out.node)) {
    Subst inner = theta;
    subst_iters(c->iters, inner);
    if (c->cond) **c->cond = substitute(**c->cond, inner);
    *c->elem = substitute(*c->elem, inner);
    return out;
  }
  for_each_child(out, [&](Expr& c) { c = substitute(c, theta); });
  return out;
}

Block substitute(const Block& b, const Subst& theta) {
  if (theta.empty()) return b;
  Block out;
  out.reserve(b.size());
  for (const auto& s : b) {
    Stmt r = s;
    std::visit(
        [&](auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, st::For>) {
            n.domain = substitute(n.domain, theta);
            n.pattern = substitute(n.pattern, theta);
            n.body = substitute(n.body, shadow(theta, n.pattern));
          } else if constexpr (std::is_same_v<T, st::IfSome> || std::is_same_v<T, st::WhileSome>) {
            Subst inner = theta;
            subst_iters(n.iters, inner);
            n.cond = substitute(n.cond, inner);
            n.body = substitute(n.body, inner);
          } else {
            for_each_stmt_expr(r, [&](Expr& e) { e = substitute(e, theta); });
            for_each_block(r, [&](Block& inner) { inner = substitute(inner, theta); });
          }
        },
        r.node);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace alda::detail
