// Statement-level eliminations down to the kernel, and the kernel audit.

#include <algorithm>
#include <map>

#include "alda/lowering.hpp"
#include "lower_common.hpp"

namespace alda::lowering {

using namespace ast;
using detail::lowering_error;

namespace {

Expr int_lit(std::size_t i) { return lit(Value::integer(static_cast<std::int64_t>(i))); }

Expr conj(std::vector<Expr> parts) {
  Expr out = std::move(parts.front());
  for (std::size_t i = 1; i < parts.size(); ++i) out = kernel_and(std::move(out), std::move(parts[i]));
  return out;
}

Stmt add_stmt(const Expr& set, Expr elem, SourceLoc loc) {
  return mk_stmt(st::ExprStmt{mk(ex::Call{CallKind::Method, Box<Expr>(set), "add", {std::move(elem)}}, loc)},
                 loc);
}

std::string base_name(const Expr& e) {
  if (const auto* v = std::get_if<ex::Var>(&e.node)) return v->name.substr(0, v->name.find('$'));
  if (const auto* f = std::get_if<ex::Field>(&e.node)) return f->name;
  return "x";
}

// ---------------------------------------------------------------------------
// Infer patterns

bool bare_equivalent(const Query& q) {
  if (!q.args) return true;
  std::set<std::string> seen;
  bool all_wild = true, identity = true;
  for (const auto& a : *q.args) {
    if (!std::holds_alternative<QueryArg::Wildcard>(a.node)) all_wild = false;
    const auto* fv = std::get_if<QueryArg::FreeVar>(&a.node);
    if (!fv || !seen.insert(fv->name).second) identity = false;
  }
  return all_wild || identity;
}

Expr query_comprehension(const Query& q, const Expr& domain, detail::FreshNames& fresh) {
  std::map<std::string, Expr> vars;
  std::vector<Expr> projected;
  pat::Tuple pattern;
  for (const auto& a : *q.args) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, QueryArg::Const>) {
            pattern.elems.push_back(mk_pat(pat::Const{lit(n.value, q.loc)}, q.loc));
          } else if constexpr (std::is_same_v<T, QueryArg::BoundVar>) {
            pattern.elems.push_back(mk_pat(pat::Bound{*n.var}, q.loc));
          } else if constexpr (std::is_same_v<T, QueryArg::FreeVar>) {
            auto it = vars.find(n.name);
            if (it == vars.end()) {
              it = vars.emplace(n.name, var(fresh.fresh(n.name), VarKind::Bound, q.loc)).first;
              projected.push_back(it->second);
            }
            pattern.elems.push_back(mk_pat(pat::Var{it->second}, q.loc));
          } else {
            auto v = var(fresh.fresh("_"), VarKind::Bound, q.loc);
            projected.push_back(v);
            pattern.elems.push_back(mk_pat(pat::Var{v}, q.loc));
          }
        },
        a.node);
  }
  ex::Comprehension c{mk(ex::Tuple{std::move(projected)}, q.loc),
                      {Iterator{mk_pat(std::move(pattern), q.loc), domain}},
                      std::nullopt};
  return mk(std::move(c), q.loc);
}

void infer_stmt(Stmt& s, Block& out, detail::FreshNames& fresh) {
  auto* inf = std::get_if<st::Infer>(&s.node);
  if (!inf) {
    out.push_back(std::move(s));
    return;
  }
  auto& qs = inf->call.queries;
  bool all_bare = true;
  for (auto& q : qs) {
    if (bare_equivalent(q)) {
      q.args.reset();
    } else {
      all_bare = false;
    }
  }
  if (inf->targets.empty()) {
    for (auto& q : qs) q.args.reset();
  }
  if (all_bare || inf->targets.empty()) {
    out.push_back(std::move(s));
    return;
  }
  const auto n = qs.size();
  const auto k = inf->targets.size();
  if (k != n && k != 1) {
    lowering_error("infer-targets", "infer returns " + std::to_string(n) + " results to " +
                                        std::to_string(k) + " targets", s.loc);
  }
  std::vector<Expr> targets;
  Block post;
  std::vector<Expr> parts;  // one value per query when packing into one target
  for (std::size_t i = 0; i < n; ++i) {
    bool direct = k == n && !qs[i].args;
    if (direct) {
      targets.push_back(inf->targets[i]);
      continue;
    }
    auto y = var(fresh.fresh("y"), VarKind::Local, s.loc);
    targets.push_back(y);
    if (!qs[i].args) {
      parts.push_back(y);
      continue;
    }
    auto comp = query_comprehension(qs[i], y, fresh);
    qs[i].args.reset();
    if (k == n) {
      post.push_back(mk_stmt(st::Assign{inf->targets[i], std::move(comp)}, s.loc));
    } else {
      auto z = var(fresh.fresh("z"), VarKind::Local, s.loc);
      post.push_back(mk_stmt(st::Assign{z, std::move(comp)}, s.loc));
      parts.push_back(z);
    }
  }
  if (k != n) post.push_back(mk_stmt(st::Assign{inf->targets[0], mk(ex::Tuple{std::move(parts)}, s.loc)}, s.loc));
  inf->targets = std::move(targets);
  out.push_back(std::move(s));
  out.insert(out.end(), post.begin(), post.end());
}

// ---------------------------------------------------------------------------
// ifSome / whileSome

Pattern rename_pattern(const Pattern& p, const detail::Subst& theta) {
  Pattern r = p;
  std::visit(
      [&](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, pat::Var>) {
          for (const auto& [from, to] : theta) {
            if (*n.var == from) {
              *n.var = to;
              break;
            }
          }
        } else if constexpr (std::is_same_v<T, pat::Bound>) {
          *n.var = detail::substitute(*n.var, theta);
        } else if constexpr (std::is_same_v<T, pat::Const>) {
          *n.expr = detail::substitute(*n.expr, theta);
        } else if constexpr (std::is_same_v<T, pat::Tuple>) {
          for (auto& x : n.elems) x = rename_pattern(x, theta);
        }
      },
      r.node);
  return r;
}

// for pat' in e: ... if b' and not flag: x := x'; s; flag := True
Block witness_loops(const std::vector<Iterator>& iters, const Expr& cond, const Block& body,
                    const Expr& flag, detail::FreshNames& fresh, SourceLoc loc) {
  std::vector<Expr> vars;
  for (const auto& it : iters) detail::pattern_vars(*it.pattern, vars);
  detail::Subst theta;
  for (const auto& v : vars) theta.emplace_back(v, var(fresh.fresh(base_name(v)), VarKind::Bound, v.loc));

  Block inner;
  for (const auto& [v, primed] : theta) inner.push_back(mk_stmt(st::Assign{v, primed}, loc));
  inner.insert(inner.end(), body.begin(), body.end());
  inner.push_back(mk_stmt(st::Assign{flag, lit(Value::boolean(true))}, loc));

  auto guard = kernel_and(detail::substitute(cond, theta), kernel_not(flag));
  Block cur{mk_stmt(st::If{std::move(guard), std::move(inner), std::nullopt}, loc)};
  for (std::size_t i = iters.size(); i-- > 0;) {
    // A domain sees the witnesses of the iterators before it only.
    std::vector<Expr> earlier;
    for (std::size_t j = 0; j < i; ++j) detail::pattern_vars(*iters[j].pattern, earlier);
    detail::Subst prefix;
    for (const auto& kv : theta) {
      if (std::find(earlier.begin(), earlier.end(), kv.first) != earlier.end()) prefix.push_back(kv);
    }
    auto pattern = rename_pattern(*iters[i].pattern, theta);
    auto domain = detail::substitute(*iters[i].domain, prefix);
    cur = Block{mk_stmt(st::For{std::move(pattern), std::move(domain), std::move(cur)}, loc)};
  }
  return cur;
}

void some_stmt(Stmt& s, Block& out, detail::FreshNames& fresh) {
  const auto loc = s.loc;
  if (auto* i = std::get_if<st::IfSome>(&s.node)) {
    auto flag = var(fresh.fresh("foundOne"), VarKind::Local, loc);
    out.push_back(mk_stmt(st::Assign{flag, lit(Value::boolean(false))}, loc));
    auto loops = witness_loops(i->iters, i->cond, i->body, flag, fresh, loc);
    out.insert(out.end(), loops.begin(), loops.end());
    return;
  }
  if (auto* w = std::get_if<st::WhileSome>(&s.node)) {
    auto flag = var(fresh.fresh("foundOne"), VarKind::Local, loc);
    out.push_back(mk_stmt(st::Assign{flag, lit(Value::boolean(true))}, loc));
    Block body{mk_stmt(st::Assign{flag, lit(Value::boolean(false))}, loc)};
    auto loops = witness_loops(w->iters, w->cond, w->body, flag, fresh, loc);
    body.insert(body.end(), loops.begin(), loops.end());
    out.push_back(mk_stmt(st::While{flag, std::move(body)}, loc));
    return;
  }
  out.push_back(std::move(s));
}

// ---------------------------------------------------------------------------
// Comprehensions

// =x elements become fresh variables compared with x in the condition.
Pattern unbind(const Pattern& p, std::vector<Expr>& eqs, detail::FreshNames& fresh) {
  if (const auto* b = std::get_if<pat::Bound>(&p.node)) {
    auto y = var(fresh.fresh("y"), VarKind::Bound, p.loc);
    eqs.push_back(binary(BinaryOp::Is, y, *b->var, p.loc));
    return mk_pat(pat::Var{y}, p.loc);
  }
  Pattern r = p;
  if (auto* t = std::get_if<pat::Tuple>(&r.node)) {
    for (auto& x : t->elems) x = unbind(x, eqs, fresh);
  }
  return r;
}

void comprehension_stmt(Stmt& s, Block& out, detail::FreshNames& fresh) {
  auto* a = std::get_if<st::Assign>(&s.node);
  if (!a || !a->value.is<ex::Comprehension>()) {
    out.push_back(std::move(s));
    return;
  }
  const auto loc = s.loc;
  bool self_ref = detail::any_expr(a->value, [&](const Expr& x) { return x == a->target; });
  auto& c = a->value.as<ex::Comprehension>();
  std::vector<Expr> conds;
  for (auto& it : c.iters) *it.pattern = unbind(*it.pattern, conds, fresh);
  if (c.cond) conds.push_back(std::move(**c.cond));

  Expr set = self_ref ? var(fresh.fresh("t"), VarKind::Local, loc) : a->target;

  Block cur{add_stmt(set, std::move(*c.elem), loc)};
  if (!conds.empty()) cur = Block{mk_stmt(st::If{conj(std::move(conds)), std::move(cur), std::nullopt}, loc)};
  for (auto it = c.iters.rbegin(); it != c.iters.rend(); ++it) {
    cur = Block{mk_stmt(st::For{std::move(*it->pattern), std::move(*it->domain), std::move(cur)}, loc)};
  }
  out.push_back(mk_stmt(st::NewObj{set, kSetClass}, loc));
  out.insert(out.end(), cur.begin(), cur.end());
  if (self_ref) out.push_back(mk_stmt(st::Assign{std::move(a->target), set}, loc));
}

// ---------------------------------------------------------------------------
// Tuple patterns in iterators

struct Match {
  std::vector<Expr> shape;  // isTuple / len checks, outermost first
  std::vector<Expr> lhs, rhs;  // component must equal value
  detail::Subst theta;         // pattern variable -> select chain
};

void analyze(const Pattern& p, const Expr& c, Match& m) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, pat::Var>) {
          for (const auto& [from, to] : m.theta) {
            if (from == *n.var) {
              m.lhs.push_back(c);
              m.rhs.push_back(to);
              return;
            }
          }
          m.theta.emplace_back(*n.var, c);
        } else if constexpr (std::is_same_v<T, pat::Bound>) {
          m.lhs.push_back(c);
          m.rhs.push_back(*n.var);
        } else if constexpr (std::is_same_v<T, pat::Const>) {
          m.lhs.push_back(c);
          m.rhs.push_back(*n.expr);
        } else if constexpr (std::is_same_v<T, pat::Tuple>) {
          m.shape.push_back(unary(UnaryOp::IsTuple, c, p.loc));
          m.shape.push_back(binary(BinaryOp::Is, unary(UnaryOp::Len, c, p.loc), int_lit(n.elems.size()), p.loc));
          for (std::size_t i = 0; i < n.elems.size(); ++i) {
            analyze(n.elems[i], binary(BinaryOp::Select, c, int_lit(i + 1), p.loc), m);
          }
        }
      },
      p.node);
}

std::optional<Expr> guard_of(Match& m, SourceLoc loc) {
  std::vector<Expr> parts = m.shape;
  if (m.lhs.size() == 1) {
    parts.push_back(binary(BinaryOp::Is, m.lhs[0], m.rhs[0], loc));
  } else if (!m.lhs.empty()) {
    parts.push_back(binary(BinaryOp::Is, mk(ex::Tuple{m.lhs}, loc), mk(ex::Tuple{m.rhs}, loc), loc));
  }
  if (parts.empty()) return std::nullopt;
  return conj(std::move(parts));
}

bool simple_binder(const Pattern& p) {
  const auto* v = std::get_if<pat::Var>(&p.node);
  if (!v) return false;
  const auto* e = std::get_if<ex::Var>(&v->var->node);
  return e && e->kind == VarKind::Bound;
}

Expr quant_patterns(const Expr& e, detail::FreshNames& fresh) {
  Expr r = e;
  detail::for_each_child(r, [&](Expr& c) { c = quant_patterns(c, fresh); });
  auto* q = std::get_if<ex::Quant>(&r.node);
  if (!q || q->iters.size() != 1 || simple_binder(*q->iters[0].pattern)) return r;
  auto x = var(fresh.fresh("x"), VarKind::Bound, e.loc);
  Match m;
  analyze(*q->iters[0].pattern, x, m);
  auto body = detail::substitute(*q->cond, m.theta);
  auto g = guard_of(m, e.loc);
  Expr cond = g ? kernel_and(std::move(*g), std::move(body)) : std::move(body);
  return mk(ex::Quant{Quantifier::Some, {Iterator{mk_pat(pat::Var{x}, e.loc), std::move(*q->iters[0].domain)}},
                      std::move(cond)},
            e.loc);
}

void for_stmt(Stmt& s, Block& out, detail::FreshNames& fresh) {
  auto* f = std::get_if<st::For>(&s.node);
  if (!f || simple_binder(f->pattern)) {
    out.push_back(std::move(s));
    return;
  }
  const auto loc = s.loc;
  auto x = var(fresh.fresh("x"), VarKind::Bound, loc);
  Match m;
  analyze(f->pattern, x, m);
  auto body = detail::substitute(f->body, m.theta);
  auto g = guard_of(m, loc);
  auto guarded = [&](Block b) {
    if (!g) return b;
    return Block{mk_stmt(st::If{*g, std::move(b), std::nullopt}, loc)};
  };
  auto loop = [&](const Expr& dom, Block b) {
    return mk_stmt(st::For{mk_pat(pat::Var{x}, loc), dom, std::move(b)}, loc);
  };

  if (!f->pattern.is<pat::Tuple>()) {
    out.push_back(loop(f->domain, guarded(std::move(body))));
    return;
  }
  auto S = var(fresh.fresh("S"), VarKind::Local, loc);
  out.push_back(mk_stmt(st::Assign{S, std::move(f->domain)}, loc));
  // Sets: keep the matching elements, then iterate over them.
  auto matched = var(fresh.fresh("S"), VarKind::Local, loc);
  Block set_branch;
  set_branch.push_back(mk_stmt(st::NewObj{matched, kSetClass}, loc));
  set_branch.push_back(loop(S, guarded(Block{add_stmt(matched, x, loc)})));
  set_branch.push_back(loop(matched, body));
  Block seq_branch{loop(S, guarded(std::move(body)))};
  out.push_back(mk_stmt(st::If{mk(ex::IsInstance{S, kSetClass}, loc), std::move(set_branch),
                               std::move(seq_branch)},
                        loc));
}

// ---------------------------------------------------------------------------
// Audit

void audit_expr(const Expr& e) {
  detail::visit_exprs(e, [](const Expr& x) {
    auto bad = [&](const std::string& what) {
      lowering_error("kernel-audit", what + " left after lowering", x.loc);
    };
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ex::Var>) {
            if (n.kind == VarKind::Unresolved) bad("unresolved name " + n.name);
            bool fresh_name = n.name.find('$') != std::string::npos;
            if (fresh_name && n.kind == VarKind::Param) bad("parameter named " + n.name);
          } else if constexpr (std::is_same_v<T, ex::Field>) {
            if (n.name.find('$') != std::string::npos) bad("field named " + n.name);
          } else if constexpr (std::is_same_v<T, ex::Binary>) {
            if (n.op == BinaryOp::And) bad("and");
          } else if constexpr (std::is_same_v<T, ex::Quant>) {
            if (n.quantifier != Quantifier::Some) bad("each");
            if (n.iters.size() != 1 || !simple_binder(*n.iters[0].pattern)) bad("quantifier pattern");
          } else if constexpr (std::is_same_v<T, ex::Call>) {
            if (n.kind == CallKind::Implicit) bad("unresolved call " + n.method);
          } else if constexpr (std::is_same_v<T, ex::SetLit>) {
            bad("set literal");
          } else if constexpr (std::is_same_v<T, ex::Comprehension>) {
            bad("comprehension");
          } else if constexpr (std::is_same_v<T, ex::Infer>) {
            bad("infer expression");
          } else if constexpr (std::is_same_v<T, ex::New>) {
            bad("new expression");
          }
        },
        x.node);
  });
}

void audit_block(const Block& b) {
  detail::visit_stmts(b, [](const Stmt& s) {
    auto bad = [&](const std::string& what) {
      lowering_error("kernel-audit", what + " left after lowering", s.loc);
    };
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, st::IfSome> || std::is_same_v<T, st::WhileSome>) {
            bad("ifSome/whileSome");
          } else if constexpr (std::is_same_v<T, st::Assign>) {
            if (n.target.template is<ex::Tuple>()) bad("tuple assignment");
          } else if constexpr (std::is_same_v<T, st::For>) {
            if (!simple_binder(n.pattern)) bad("for pattern");
          } else if constexpr (std::is_same_v<T, st::Infer>) {
            if (!n.call.target) bad("infer without target");
            for (const auto& q : n.call.queries) {
              if (q.args) bad("query pattern");
            }
          }
        },
        s.node);
    detail::for_each_stmt_expr(s, [](const Expr& e) { audit_expr(e); });
  });
}

}  // namespace

Program infer_patterns(Program p) {
  detail::FreshNames fresh(p);
  detail::rewrite_program(p, [&](Stmt& s, Block& out) { infer_stmt(s, out, fresh); });
  return p;
}

Program some_statements(Program p) {
  detail::FreshNames fresh(p);
  detail::rewrite_program(p, [&](Stmt& s, Block& out) { some_stmt(s, out, fresh); });
  return p;
}

Program comprehensions(Program p) {
  detail::FreshNames fresh(p);
  detail::rewrite_program(p, [&](Stmt& s, Block& out) { comprehension_stmt(s, out, fresh); });
  return p;
}

Program iterator_patterns(Program p) {
  detail::FreshNames fresh(p);
  detail::rewrite_program(p, [&](Stmt& s, Block& out) {
    detail::for_each_stmt_expr(s, [&](Expr& e) { e = quant_patterns(e, fresh); });
    for_stmt(s, out, fresh);
  });
  return p;
}

void audit_kernel(const Program& p) {
  if (!p.rulesets.empty()) lowering_error("kernel-audit", "global rule sets left after lowering", {});
  for (const auto& c : p.classes) {
    if (c.name.find('$') != std::string::npos && c.name != kGlobalsClass) {
      lowering_error("kernel-audit", "class named " + c.name, c.loc);
    }
    for (const auto& m : c.methods) {
      if (m.name.find('$') != std::string::npos) lowering_error("kernel-audit", "method named " + m.name, m.loc);
      audit_block(m.body);
    }
  }
  audit_block(p.top);
}

Program lower(Program p, const std::vector<std::string>& extra_globals) {
  p = unique_ruleset_names(std::move(p));
  p = globals_to_fields(std::move(p), extra_globals);
  p = boolean_ops(std::move(p));
  p = hoist_effects(std::move(p));
  p = pattern_exprs(std::move(p));
  p = wildcards(std::move(p));
  p = infer_patterns(std::move(p));
  p = some_statements(std::move(p));
  p = comprehensions(std::move(p));
  p = iterator_patterns(std::move(p));
  audit_kernel(p);
  return p;
}

}  // namespace alda::lowering
