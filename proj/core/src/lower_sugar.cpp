// Expression-level passes: boolean operators, effect hoisting, pattern
// expressions, wildcards.

#include <algorithm>

#include "alda/lowering.hpp"
#include "lower_common.hpp"

namespace alda::lowering {

using namespace ast;
using detail::lowering_error;

namespace {

Expr bool_ops(const Expr& e) {
  Expr out = e;
  detail::for_each_child(out, [](Expr& c) { c = bool_ops(c); });
  if (auto* b = std::get_if<ex::Binary>(&out.node); b && b->op == BinaryOp::And) {
    auto r = kernel_and(std::move(*b->lhs), std::move(*b->rhs));
    r.loc = e.loc;
    return r;
  }
  if (auto* q = std::get_if<ex::Quant>(&out.node)) {
    bool each = q->quantifier == Quantifier::Each;
    Expr body = each ? kernel_not(std::move(*q->cond)) : std::move(*q->cond);
    for (auto it = q->iters.rbegin(); it != q->iters.rend(); ++it) {
      body = mk(ex::Quant{Quantifier::Some, {std::move(*it)}, std::move(body)}, e.loc);
    }
    return each ? kernel_not(std::move(body)) : body;
  }
  return out;
}

// Names bound by the patterns of `iters`.
void binder_names(const std::vector<Iterator>& iters, std::set<std::string>& out) {
  for (const auto& it : iters) {
    std::vector<Expr> vars;
    detail::pattern_vars(*it.pattern, vars);
    for (const auto& v : vars) {
      if (const auto* bv = std::get_if<ex::Var>(&v.node); bv && bv->kind == VarKind::Bound) {
        out.insert(bv->name);
      }
    }
  }
}

bool mentions_any(const Expr& e, const std::set<std::string>& bound, const std::vector<Expr>& others) {
  return detail::any_expr(e, [&](const Expr& x) {
    if (const auto* v = std::get_if<ex::Var>(&x.node); v && v->kind == VarKind::Bound) {
      if (bound.contains(v->name)) return true;
    }
    return std::find(others.begin(), others.end(), x) != others.end();
  });
}

bool mentions_pattern(const Pattern& p, const std::set<std::string>& bound,
                      const std::vector<Expr>& others) {
  bool found = false;
  detail::for_each_pattern_expr(p, [&](const Expr& e) {
    if (!e.is<ex::Var>()) found = found || mentions_any(e, bound, others);
  });
  return found;
}

Stmt call_stmt(Expr target, std::string method, std::vector<Expr> args, SourceLoc loc) {
  return mk_stmt(st::ExprStmt{mk(ex::Call{CallKind::Method, Box<Expr>(std::move(target)),
                                          std::move(method), std::move(args)},
                                 loc)},
                 loc);
}

bool simple_target(const Expr& t) {
  if (t.is<ex::Var>()) return true;
  if (const auto* f = std::get_if<ex::Field>(&t.node)) {
    const auto& o = *f->object;
    return o.is<ex::Var>() || o.is<ex::SelfRef>() || o.is<ex::GlobalsRef>();
  }
  return false;
}

class Hoister {
 public:
  Hoister(detail::FreshNames& fresh, const detail::ClassTable& ct) : fresh_(fresh), ct_(ct) {}

  void stmt(Stmt& s, Block& out) {
    const SourceLoc loc = s.loc;
    std::visit(
        [&](auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, st::Assign>) {
            assign(std::move(n.target), std::move(n.value), out, loc);
          } else if constexpr (std::is_same_v<T, st::NewObj>) {
            n.target = target(n.target, out);
            out.push_back(std::move(s));
          } else if constexpr (std::is_same_v<T, st::Infer>) {
            infer_call(n.call, out, {}, {});
            for (auto& t : n.targets) t = target(t, out);
            out.push_back(std::move(s));
          } else if constexpr (std::is_same_v<T, st::If>) {
            n.cond = hoist(n.cond, out, {}, {});
            out.push_back(std::move(s));
          } else if constexpr (std::is_same_v<T, st::While>) {
            Block pre;
            n.cond = hoist(n.cond, pre, {}, {});
            out.insert(out.end(), pre.begin(), pre.end());
            n.body.insert(n.body.end(), pre.begin(), pre.end());
            out.push_back(std::move(s));
          } else if constexpr (std::is_same_v<T, st::For>) {
            n.domain = hoist(n.domain, out, {}, {});
            n.pattern = pattern(n.pattern, out, {}, {});
            out.push_back(std::move(s));
          } else if constexpr (std::is_same_v<T, st::IfSome> || std::is_same_v<T, st::WhileSome>) {
            Block pre;
            std::vector<Expr> targets;
            for (const auto& it : n.iters) detail::pattern_vars(*it.pattern, targets);
            for (auto& it : n.iters) {
              *it.domain = hoist(*it.domain, pre, {}, targets);
              *it.pattern = pattern(*it.pattern, pre, {}, targets);
            }
            n.cond = hoist(n.cond, pre, {}, targets);
            out.insert(out.end(), pre.begin(), pre.end());
            if constexpr (std::is_same_v<T, st::WhileSome>) {
              n.body.insert(n.body.end(), pre.begin(), pre.end());
            }
            out.push_back(std::move(s));
          } else if constexpr (std::is_same_v<T, st::ExprStmt>) {
            if (n.expr.template is<ex::Infer>()) {
              auto call = std::move(n.expr.template as<ex::Infer>().call);
              infer_call(call, out, {}, {});
              out.push_back(mk_stmt(st::Infer{{}, std::move(call)}, loc));
              return;
            }
            // A statement that only allocates leaves nothing behind.
            bool allocation = n.expr.template is<ex::SetLit>() || n.expr.template is<ex::New>() ||
                              n.expr.template is<ex::Comprehension>();
            n.expr = hoist(n.expr, out, {}, {});
            if (!allocation) out.push_back(std::move(s));
          } else if constexpr (std::is_same_v<T, st::Return>) {
            if (n.value) *n.value = hoist(*n.value, out, {}, {});
            out.push_back(std::move(s));
          } else {
            out.push_back(std::move(s));
          }
        },
        s.node);
  }

 private:
  Expr temp(SourceLoc loc) { return var(fresh_.fresh("t"), VarKind::Local, loc); }

  // Evaluates the sub-expressions of an assignment target.
  Expr target(const Expr& t, Block& out) {
    if (const auto* f = std::get_if<ex::Field>(&t.node)) {
      return field(hoist(*f->object, out, {}, {}), f->name, t.loc);
    }
    return t;
  }

  void check_free(const Expr& e, const std::set<std::string>& bound, const std::vector<Expr>& others) {
    if (!bound.empty() || !others.empty()) {
      if (mentions_any(e, bound, others)) {
        lowering_error("effect-in-binder-scope",
                       "allocation inside a quantifier or comprehension cannot depend on its variables",
                       e.loc);
      }
    }
  }

  void infer_call(InferCall& call, Block& out, const std::set<std::string>& bound,
                  const std::vector<Expr>& others) {
    if (call.target) **call.target = hoist(**call.target, out, bound, others);
    for (auto& q : call.queries) {
      if (!q.args) continue;
      for (auto& a : *q.args) {
        if (auto* b = std::get_if<QueryArg::BoundVar>(&a.node)) {
          *b->var = hoist(*b->var, out, bound, others);
        }
      }
    }
    for (auto& kw : call.kwargs) *kw.value = hoist(*kw.value, out, bound, others);
  }

  Pattern pattern(const Pattern& p, Block& out, const std::set<std::string>& bound,
                  const std::vector<Expr>& others) {
    Pattern r = p;
    std::visit(
        [&](auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, pat::Bound>) {
            *n.var = hoist(*n.var, out, bound, others);
          } else if constexpr (std::is_same_v<T, pat::Const>) {
            *n.expr = hoist(*n.expr, out, bound, others);
          } else if constexpr (std::is_same_v<T, pat::Tuple>) {
            for (auto& x : n.elems) x = pattern(x, out, bound, others);
          }
        },
        r.node);
    return r;
  }

  void iterators(std::vector<Iterator>& iters, Block& out, std::set<std::string>& bound,
                 const std::vector<Expr>& others) {
    binder_names(iters, bound);
    for (auto& it : iters) {
      *it.domain = hoist(*it.domain, out, bound, others);
      *it.pattern = pattern(*it.pattern, out, bound, others);
    }
  }

  void setup_call(const Expr& obj, const std::string& cls, std::optional<std::vector<Expr>> args,
                  Block& out, SourceLoc loc) {
    if (!args) return;
    if (ct_.method(cls, "setup")) {
      out.push_back(call_stmt(obj, "setup", std::move(*args), loc));
    } else if (!args->empty()) {
      lowering_error("no-setup", "class " + cls + " has no setup method", loc);
    }
  }

  // Moves set literals, comprehensions, infer and new out of `e` into `out`.
  Expr hoist(const Expr& e, Block& out, const std::set<std::string>& bound,
             const std::vector<Expr>& others) {
    Expr r = e;
    if (auto* q = std::get_if<ex::Quant>(&r.node)) {
      auto inner = bound;
      iterators(q->iters, out, inner, others);
      *q->cond = hoist(*q->cond, out, inner, others);
      return r;
    }
    if (auto* c = std::get_if<ex::Comprehension>(&r.node)) {
      auto inner = bound;
      iterators(c->iters, out, inner, others);
      if (c->cond) **c->cond = hoist(**c->cond, out, inner, others);
      *c->elem = hoist(*c->elem, out, inner, others);
      check_free(r, bound, others);
      auto t = temp(e.loc);
      out.push_back(mk_stmt(st::Assign{t, std::move(r)}, e.loc));
      return t;
    }
    if (auto* i = std::get_if<ex::Infer>(&r.node)) {
      infer_call(i->call, out, bound, others);
      check_free(r, bound, others);
      auto t = temp(e.loc);
      out.push_back(mk_stmt(st::Infer{{t}, std::move(i->call)}, e.loc));
      return t;
    }
    detail::for_each_child(r, [&](Expr& c) { c = hoist(c, out, bound, others); });
    if (auto* s = std::get_if<ex::SetLit>(&r.node)) {
      check_free(r, bound, others);
      auto t = temp(e.loc);
      build_set(t, std::move(s->elems), out, e.loc);
      return t;
    }
    if (auto* n = std::get_if<ex::New>(&r.node)) {
      check_free(r, bound, others);
      auto t = temp(e.loc);
      out.push_back(mk_stmt(st::NewObj{t, n->class_name}, e.loc));
      setup_call(t, n->class_name, std::move(n->setup_args), out, e.loc);
      return t;
    }
    return r;
  }

  void build_set(const Expr& t, std::vector<Expr> elems, Block& out, SourceLoc loc) {
    out.push_back(mk_stmt(st::NewObj{t, kSetClass}, loc));
    for (auto& x : elems) out.push_back(call_stmt(t, "add", {std::move(x)}, loc));
  }

  void assign(Expr tgt, Expr value, Block& out, SourceLoc loc) {
    if (tgt.is<ex::Tuple>()) {
      if (value.is<ex::Infer>()) {
        auto& call = value.as<ex::Infer>().call;
        infer_call(call, out, {}, {});
        std::vector<Expr> targets;
        for (auto& x : tgt.as<ex::Tuple>().elems) targets.push_back(target(x, out));
        out.push_back(mk_stmt(st::Infer{std::move(targets), std::move(call)}, loc));
        return;
      }
      auto t = temp(loc);
      assign(t, std::move(value), out, loc);
      destructure(tgt, t, out, loc);
      return;
    }
    tgt = target(tgt, out);
    bool self_ref = detail::any_expr(value, [&](const Expr& x) { return x == tgt; });
    bool direct = simple_target(tgt) && !self_ref;
    if (auto* c = std::get_if<ex::Comprehension>(&value.node)) {
      std::set<std::string> inner;
      iterators(c->iters, out, inner, {});
      if (c->cond) **c->cond = hoist(**c->cond, out, inner, {});
      *c->elem = hoist(*c->elem, out, inner, {});
      out.push_back(mk_stmt(st::Assign{std::move(tgt), std::move(value)}, loc));
      return;
    }
    if (auto* i = std::get_if<ex::Infer>(&value.node)) {
      infer_call(i->call, out, {}, {});
      out.push_back(mk_stmt(st::Infer{{std::move(tgt)}, std::move(i->call)}, loc));
      return;
    }
    if (direct && value.is<ex::SetLit>()) {
      std::vector<Expr> elems;
      for (auto& x : value.as<ex::SetLit>().elems) elems.push_back(hoist(x, out, {}, {}));
      build_set(tgt, std::move(elems), out, loc);
      return;
    }
    if (direct && value.is<ex::New>()) {
      auto& n = value.as<ex::New>();
      std::optional<std::vector<Expr>> args;
      if (n.setup_args) {
        args.emplace();
        for (auto& x : *n.setup_args) args->push_back(hoist(x, out, {}, {}));
      }
      out.push_back(mk_stmt(st::NewObj{tgt, n.class_name}, loc));
      setup_call(tgt, n.class_name, std::move(args), out, loc);
      return;
    }
    value = hoist(value, out, {}, {});
    out.push_back(mk_stmt(st::Assign{std::move(tgt), std::move(value)}, loc));
  }

  void destructure(const Expr& tgt, const Expr& src, Block& out, SourceLoc loc) {
    const auto& elems = tgt.as<ex::Tuple>().elems;
    for (std::size_t i = 0; i < elems.size(); ++i) {
      auto part = binary(BinaryOp::Select, src, lit(Value::integer(static_cast<std::int64_t>(i + 1))), loc);
      if (elems[i].is<ex::Tuple>()) {
        auto t = temp(loc);
        out.push_back(mk_stmt(st::Assign{t, std::move(part)}, loc));
        destructure(elems[i], t, out, loc);
      } else {
        out.push_back(mk_stmt(st::Assign{target(elems[i], out), std::move(part)}, loc));
      }
    }
  }

  detail::FreshNames& fresh_;
  const detail::ClassTable& ct_;
};

// Pattern constants evaluated once before the statement.
class PatternHoister {
 public:
  explicit PatternHoister(detail::FreshNames& fresh) : fresh_(fresh) {}

  void stmt(Stmt& s, Block& out) {
    std::visit(
        [&](auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, st::While> || std::is_same_v<T, st::WhileSome>) {
            // Loop conditions are re-evaluated; constants stay as guards.
          } else if constexpr (std::is_same_v<T, st::For>) {
            n.domain = expr(n.domain, out, {});
            n.pattern = pattern(n.pattern, out, {});
          } else if constexpr (std::is_same_v<T, st::IfSome>) {
            std::set<std::string> none;
            std::vector<Expr> targets;
            for (const auto& it : n.iters) detail::pattern_vars(*it.pattern, targets);
            for (auto& it : n.iters) {
              *it.domain = expr(*it.domain, out, none);
              if (!mentions_pattern(*it.pattern, none, targets)) {
                *it.pattern = pattern(*it.pattern, out, none);
              }
            }
            n.cond = expr(n.cond, out, none);
          } else {
            detail::for_each_stmt_expr(s, [&](Expr& e) { e = expr(e, out, {}); });
          }
        },
        s.node);
    out.push_back(std::move(s));
  }

 private:
  Pattern pattern(const Pattern& p, Block& out, const std::set<std::string>& bound) {
    Pattern r = p;
    if (auto* c = std::get_if<pat::Const>(&r.node)) {
      if (mentions_any(*c->expr, bound, {})) return r;
      auto v = var(fresh_.fresh("v"), VarKind::Local, p.loc);
      out.push_back(mk_stmt(st::Assign{v, std::move(*c->expr)}, p.loc));
      return mk_pat(pat::Bound{std::move(v)}, p.loc);
    }
    if (auto* t = std::get_if<pat::Tuple>(&r.node)) {
      for (auto& x : t->elems) x = pattern(x, out, bound);
    }
    return r;
  }

  void iterators(std::vector<Iterator>& iters, Block& out, std::set<std::string>& bound) {
    for (auto& it : iters) {
      *it.domain = expr(*it.domain, out, bound);
      *it.pattern = pattern(*it.pattern, out, bound);
      binder_names({it}, bound);
    }
  }

  Expr expr(const Expr& e, Block& out, const std::set<std::string>& bound) {
    Expr r = e;
    if (auto* q = std::get_if<ex::Quant>(&r.node)) {
      auto inner = bound;
      iterators(q->iters, out, inner);
      *q->cond = expr(*q->cond, out, inner);
      return r;
    }
    if (auto* c = std::get_if<ex::Comprehension>(&r.node)) {
      auto inner = bound;
      iterators(c->iters, out, inner);
      if (c->cond) **c->cond = expr(**c->cond, out, inner);
      *c->elem = expr(*c->elem, out, inner);
      return r;
    }
    detail::for_each_child(r, [&](Expr& c) { c = expr(c, out, bound); });
    return r;
  }

  detail::FreshNames& fresh_;
};

Pattern no_wildcards(const Pattern& p, detail::FreshNames& fresh, VarKind kind) {
  Pattern r = p;
  if (r.is<pat::Wildcard>()) return mk_pat(pat::Var{var(fresh.fresh("_"), kind, p.loc)}, p.loc);
  if (auto* t = std::get_if<pat::Tuple>(&r.node)) {
    for (auto& x : t->elems) x = no_wildcards(x, fresh, kind);
  }
  return r;
}

void no_wildcards(Expr& e, detail::FreshNames& fresh) {
  auto fix = [&](std::vector<Iterator>& iters) {
    for (auto& it : iters) *it.pattern = no_wildcards(*it.pattern, fresh, VarKind::Bound);
  };
  if (auto* q = std::get_if<ex::Quant>(&e.node)) fix(q->iters);
  if (auto* c = std::get_if<ex::Comprehension>(&e.node)) fix(c->iters);
}

}  // namespace

Program boolean_ops(Program p) {
  detail::for_all_blocks(p, [](Block& b) {
    detail::for_all_stmts(b, [](Stmt& s) {
      detail::for_each_stmt_expr(s, [](Expr& e) { e = bool_ops(e); });
    });
  });
  return p;
}

Program hoist_effects(Program p) {
  detail::FreshNames fresh(p);
  detail::ClassTable ct(p);
  Hoister h(fresh, ct);
  detail::rewrite_program(p, [&](Stmt& s, Block& out) { h.stmt(s, out); });
  return p;
}

Program pattern_exprs(Program p) {
  detail::FreshNames fresh(p);
  PatternHoister h(fresh);
  detail::rewrite_program(p, [&](Stmt& s, Block& out) { h.stmt(s, out); });
  return p;
}

Program wildcards(Program p) {
  detail::FreshNames fresh(p);
  detail::for_all_blocks(p, [&](Block& b) {
    detail::for_all_exprs(b, [&](Expr& e) { no_wildcards(e, fresh); });
    detail::for_all_stmts(b, [&](Stmt& s) {
      if (auto* f = std::get_if<st::For>(&s.node)) {
        f->pattern = no_wildcards(f->pattern, fresh, VarKind::Bound);
      } else if (auto* i = std::get_if<st::IfSome>(&s.node)) {
        for (auto& it : i->iters) *it.pattern = no_wildcards(*it.pattern, fresh, VarKind::Local);
      } else if (auto* w = std::get_if<st::WhileSome>(&s.node)) {
        for (auto& it : w->iters) *it.pattern = no_wildcards(*it.pattern, fresh, VarKind::Local);
      }
    });
  });
  return p;
}

}  // namespace alda::lowering
