#include "ast_fuzz.hpp"

#include <array>
#include <string>
#include <vector>

namespace alda::testing {

using namespace ast;

namespace {

class Fuzzer {
 public:
  Fuzzer(std::mt19937_64& rng, const FuzzParams& p) : rng_(rng), p_(p) {}

  Program program() {
    Program prog;
    int nrs = pick(0, 2);
    for (int i = 0; i < nrs; ++i) prog.rulesets.push_back(ruleset("rs" + std::to_string(i)));
    int ncls = pick(0, 2);
    classes_ = ncls;
    for (int i = 0; i < ncls; ++i) {
      ClassDef c;
      c.name = "C" + std::to_string(i);
      if (i > 0 && coin(0.5)) c.base = "C" + std::to_string(pick(0, i - 1));
      int crs = pick(0, 1);
      for (int k = 0; k < crs; ++k) c.rulesets.push_back(ruleset("crs" + std::to_string(k)));
      int nm = pick(1, 3);
      for (int k = 0; k < nm; ++k) {
        Method m;
        m.kind = coin(0.2) ? MethodKind::Defun : MethodKind::Def;
        m.name = "m" + std::to_string(k);
        int np = pick(0, 2);
        for (int j = 0; j < np; ++j) m.params.push_back("a" + std::to_string(j));
        in_method_ = true;
        m.body = block(0);
        in_method_ = false;
        c.methods.push_back(std::move(m));
      }
      prog.classes.push_back(std::move(c));
    }
    prog.top = block(0);
    return prog;
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }
  template <class T, std::size_t N>
  const T& one_of(const std::array<T, N>& xs) { return xs[pick(0, static_cast<int>(N) - 1)]; }

  std::string name() {
    static const std::array<std::string, 10> names = {"x", "y", "z", "s", "t", "edge", "path", "acc", "n", "res"};
    return one_of(names);
  }

  std::string class_name() {
    return classes_ > 0 && coin(0.7) ? "C" + std::to_string(pick(0, classes_ - 1)) : "D";
  }

  Value constant() {
    switch (pick(0, 5)) {
      case 0: return Value::integer(pick(-20, -1));
      case 1: return Value::string(one_of(std::array<std::string, 4>{"a", "chair", "x y", "it's"}));
      case 2: return Value::boolean(coin(0.5));
      case 3: return Value::none();
      default: return Value::integer(pick(0, 99));
    }
  }

  // ---- rules ----------------------------------------------------------------

  RuleSetDef ruleset(std::string rs_name) {
    RuleSetDef rs;
    rs.name = std::move(rs_name);
    // Fixed arities keep every predicate at one arity.
    static const std::array<std::pair<const char*, int>, 4> preds = {
        std::pair{"edge", 2}, {"path", 2}, {"node", 1}, {"flag", 0}};
    int n = pick(1, 3);
    for (int i = 0; i < n; ++i) {
      Rule r;
      std::vector<std::string> bound;
      int nh = pick(0, 2);
      for (int k = 0; k < nh; ++k) {
        auto [pn, ar] = one_of(preds);
        Atom a;
        a.pred.path = {pn};
        if (coin(0.2)) a.pred.path.insert(a.pred.path.begin(), "self");
        for (int j = 0; j < ar; ++j) {
          if (coin(0.2)) {
            a.args.push_back(constant());
          } else {
            std::string v = std::string(1, static_cast<char>('u' + pick(0, 3)));
            bound.push_back(v);
            a.args.push_back(LogicVar{v});
          }
        }
        r.hypotheses.push_back({std::move(a), false});
      }
      // A negated literal only uses variables bound positively.
      if (!bound.empty() && coin(0.3)) {
        Atom a;
        a.pred.path = {"node"};
        a.args.push_back(LogicVar{bound[pick(0, static_cast<int>(bound.size()) - 1)]});
        r.hypotheses.push_back({std::move(a), true});
      }
      auto [pn, ar] = preds[pick(0, 3)];
      r.conclusion.pred.path = {pn == std::string("edge") ? "path" : pn};
      for (int j = 0; j < ar; ++j) {
        if (bound.empty() || coin(0.2)) {
          r.conclusion.args.push_back(constant());
        } else {
          r.conclusion.args.push_back(LogicVar{bound[pick(0, static_cast<int>(bound.size()) - 1)]});
        }
      }
      rs.rules.push_back(std::move(r));
    }
    return rs;
  }

  // ---- expressions ----------------------------------------------------------

  Expr variable() { return var(name(), VarKind::Unresolved); }

  /// Something that can be written or =-bound: a variable or field chain.
  Expr place() {
    Expr e = in_method_ && coin(0.2) ? mk(ex::SelfRef{}) : variable();
    if (e.is<ex::SelfRef>() || coin(0.3)) e = field(std::move(e), name());
    return e;
  }

  Expr expr(int depth) {
    if (depth >= p_.max_depth) return leaf();
    switch (pick(0, 17)) {
      case 0: case 1: return leaf();
      case 2: return mk(ex::Tuple{list(depth, coin(0.2) ? 0 : pick(2, 3))});
      case 3: {
        static const std::array ops = {UnaryOp::Not, UnaryOp::Neg, UnaryOp::IsTuple, UnaryOp::Len};
        return unary(one_of(ops), expr(depth + 1));
      }
      case 4: case 5: {
        static const std::array ops = {BinaryOp::Or,  BinaryOp::And, BinaryOp::Is,  BinaryOp::IsNot,
                                       BinaryOp::Lt,  BinaryOp::Le,  BinaryOp::Gt,  BinaryOp::Ge,
                                       BinaryOp::In,  BinaryOp::NotIn, BinaryOp::Add, BinaryOp::Sub,
                                       BinaryOp::Mul, BinaryOp::Div, BinaryOp::Mod, BinaryOp::Select};
        return binary(one_of(ops), expr(depth + 1), expr(depth + 1));
      }
      case 6: return mk(ex::IsInstance{expr(depth + 1), class_name()});
      case 7: return mk(ex::Quant{coin(0.5) ? Quantifier::Some : Quantifier::Each,
                                  iterators(depth), expr(depth + 1)});
      case 8: {
        static const std::array ops = {AggregateOp::Count, AggregateOp::Max, AggregateOp::Min,
                                       AggregateOp::Sum};
        return mk(ex::Aggregate{one_of(ops), expr(depth + 1)});
      }
      case 9: case 10: return call(depth);
      case 11: return mk(ex::SetLit{list(depth, pick(0, 3))});
      case 12: {
        std::optional<Box<Expr>> cond;
        if (coin(0.6)) cond = expr(depth + 1);
        return mk(ex::Comprehension{expr(depth + 1), iterators(depth), std::move(cond)});
      }
      case 13: return mk(ex::Infer{infer_call(depth)});
      case 14: {
        std::optional<std::vector<Expr>> args;
        if (coin(0.6)) args = list(depth, pick(0, 2));
        return mk(ex::New{class_name(), std::move(args)});
      }
      case 15: return field(expr(depth + 1), name());
      default: return place();
    }
  }

  Expr leaf() {
    if (coin(0.5)) return lit(constant());
    if (in_method_ && coin(0.1)) return mk(ex::SelfRef{});
    return variable();
  }

  std::vector<Expr> list(int depth, int n) {
    std::vector<Expr> out;
    for (int i = 0; i < n; ++i) out.push_back(expr(depth + 1));
    return out;
  }

  Expr call(int depth) {
    ex::Call c;
    int kind = pick(0, in_method_ ? 3 : 2);
    if (kind == 0) {
      c.kind = CallKind::Implicit;
      c.method = one_of(std::array<std::string, 3>{"f", "AddUser", "m0"});
    } else if (kind == 1) {
      c.kind = CallKind::Method;
      c.target = expr(depth + 1);
      c.method = one_of(std::array<std::string, 4>{"add", "del", "any", "m1"});
    } else if (kind == 2) {
      c.kind = CallKind::Builtin;
      c.method = coin(0.8) ? "print" : "load_facts";
    } else {
      c.kind = CallKind::Super;
      c.method = "m0";
    }
    c.args = list(depth, pick(0, 2));
    return mk(std::move(c));
  }

  InferCall infer_call(int depth) {
    InferCall call;
    if (coin(0.3)) call.target = place();
    int nq = pick(0, 2);
    for (int i = 0; i < nq; ++i) {
      Query q;
      q.predicate = coin(0.5) ? "path" : "node";
      if (coin(0.6)) {
        q.args.emplace();
        int n = pick(0, 3);
        for (int k = 0; k < n; ++k) {
          switch (pick(0, 3)) {
            case 0: q.args->push_back({QueryArg::Const{constant()}}); break;
            case 1: q.args->push_back({QueryArg::BoundVar{place()}}); break;
            case 2: q.args->push_back({QueryArg::FreeVar{std::string(1, static_cast<char>('u' + pick(0, 3)))}}); break;
            default: q.args->push_back({QueryArg::Wildcard{}}); break;
          }
        }
      }
      call.queries.push_back(std::move(q));
    }
    int nk = pick(0, 2);
    for (int i = 0; i < nk; ++i) call.kwargs.push_back(KwArg{i == 0 ? "edge" : "node", expr(depth + 1)});
    call.ruleset = "rs0";
    return call;
  }

  // ---- patterns -------------------------------------------------------------

  Pattern pattern(int depth) {
    switch (depth >= 2 ? pick(0, 2) : pick(0, 5)) {
      case 0: return mk_pat(pat::Var{variable()});
      case 1: return mk_pat(pat::Wildcard{});
      case 2: return mk_pat(pat::Bound{place()});
      case 3: {
        std::vector<Pattern> elems;
        int n = coin(0.1) ? 0 : pick(2, 3);
        for (int i = 0; i < n; ++i) elems.push_back(pattern(depth + 1));
        return mk_pat(pat::Tuple{std::move(elems)});
      }
      case 4: return mk_pat(pat::Const{lit(constant())});
      default: return mk_pat(pat::Const{field(variable(), name())});
    }
  }

  std::vector<Iterator> iterators(int depth) {
    std::vector<Iterator> its;
    int n = pick(1, 2);
    for (int i = 0; i < n; ++i) its.push_back(Iterator{pattern(0), expr(depth + 1)});
    return its;
  }

  // ---- statements -----------------------------------------------------------

  Block block(int nest) {
    Block b;
    int n = pick(1, p_.max_block);
    for (int i = 0; i < n; ++i) b.push_back(statement(nest));
    return b;
  }

  Expr target(bool allow_tuple) {
    if (allow_tuple && coin(0.2)) {
      std::vector<Expr> elems;
      int n = pick(2, 3);
      for (int i = 0; i < n; ++i) elems.push_back(target(false));
      return mk(ex::Tuple{std::move(elems)});
    }
    return place();
  }

  Stmt statement(int nest) {
    bool compound = nest < p_.max_nest;
    switch (pick(0, compound ? 14 : 8)) {
      case 0: return mk_stmt(st::Skip{});
      case 1: {
        if (!in_method_) return mk_stmt(st::Skip{});
        std::optional<Expr> v;
        if (coin(0.7)) v = expr(0);
        return mk_stmt(st::Return{std::move(v)});
      }
      case 2: case 3: case 4: {
        Expr t = target(true);
        Expr v = expr(0);
        // Parser turns these shapes into NewObj/Infer statements.
        if (v.is<ex::Infer>() || (v.is<ex::New>() && !v.as<ex::New>().setup_args)) v = leaf();
        return mk_stmt(st::Assign{std::move(t), std::move(v)});
      }
      case 5: return mk_stmt(st::NewObj{target(false), class_name()});
      case 6: {
        std::vector<Expr> ts;
        int n = pick(0, 2);
        for (int i = 0; i < n; ++i) ts.push_back(target(false));
        return mk_stmt(st::Infer{std::move(ts), infer_call(0)});
      }
      case 7: case 8: return mk_stmt(st::ExprStmt{call(0)});
      case 9: {
        std::optional<Block> els;
        if (coin(0.5)) els = block(nest + 1);
        return mk_stmt(st::If{expr(0), block(nest + 1), std::move(els)});
      }
      case 10: case 11: return mk_stmt(st::For{pattern(0), expr(0), block(nest + 1)});
      case 12: return mk_stmt(st::While{expr(0), block(nest + 1)});
      case 13: return mk_stmt(st::IfSome{iterators(0), expr(0), block(nest + 1)});
      default: return mk_stmt(st::WhileSome{iterators(0), expr(0), block(nest + 1)});
    }
  }

  std::mt19937_64& rng_;
  FuzzParams p_;
  bool in_method_ = false;
  int classes_ = 0;
};

}  // namespace

Program random_program(std::mt19937_64& rng, const FuzzParams& p) {
  return Fuzzer(rng, p).program();
}

}  // namespace alda::testing
