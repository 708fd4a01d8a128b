#include "alda/parser.hpp"

#include <cstdint>
#include <unordered_set>

#include "lexer.hpp"

namespace alda {

using namespace ast;
using detail::Token;
using detail::TokKind;

namespace {

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program program() {
    Program prog;
    while (!at(TokKind::End)) {
      if (accept(TokKind::Newline)) continue;
      if (at_kw("rules")) {
        prog.rulesets.push_back(ruleset());
      } else if (at_kw("class")) {
        prog.classes.push_back(class_def());
      } else {
        prog.top.push_back(statement());
      }
    }
    if (prog.top.empty()) prog.top.push_back(mk_stmt(st::Skip{}, peek().loc));
    return prog;
  }

 private:
  // ---- token helpers ------------------------------------------------------

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at(TokKind k) const { return peek().kind == k; }
  bool at_kw(std::string_view w, std::size_t ahead = 0) const {
    return peek(ahead).kind == TokKind::Keyword && peek(ahead).text == w;
  }
  bool at_op(std::string_view o, std::size_t ahead = 0) const {
    return peek(ahead).kind == TokKind::Op && peek(ahead).text == o;
  }
  bool at_name(std::size_t ahead = 0) const { return peek(ahead).kind == TokKind::Name; }

  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool accept(TokKind k) {
    if (!at(k)) return false;
    next();
    return true;
  }
  bool accept_op(std::string_view o) {
    if (!at_op(o)) return false;
    next();
    return true;
  }
  bool accept_kw(std::string_view w) {
    if (!at_kw(w)) return false;
    next();
    return true;
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case TokKind::Newline: return "end of line";
      case TokKind::Indent: return "indent";
      case TokKind::Dedent: return "dedent";
      case TokKind::End: return "end of input";
      case TokKind::Str: return "string";
      default: return "'" + t.text + "'";
    }
  }

  [[noreturn]] void error(const std::string& msg) const { error_at(peek().loc, msg); }
  [[noreturn]] static void error_at(SourceLoc loc, const std::string& msg) {
    throw CompileError(Diagnostic::Stage::Syntax, "syntax", msg, loc);
  }
  [[noreturn]] void expected(const std::string& what) const {
    error("expected " + what + ", found " + describe(peek()));
  }

  void expect_op(std::string_view o) {
    if (!accept_op(o)) expected("'" + std::string(o) + "'");
  }
  void expect_kw(std::string_view w) {
    if (!accept_kw(w)) expected("'" + std::string(w) + "'");
  }
  std::string expect_name() {
    if (!at_name()) expected("identifier");
    return next().text;
  }
  void expect_newline() {
    if (!accept(TokKind::Newline) && !at(TokKind::End)) expected("end of line");
  }

  // ---- rule sets ----------------------------------------------------------

  RuleSetDef ruleset() {
    SourceLoc loc = next().loc;  // 'rules'
    RuleSetDef rs{expect_name(), {}, loc};
    if (at_op("(")) skip_balanced();  // optional declarations, ignored
    expect_op(":");
    expect_newline();
    if (!accept(TokKind::Indent)) expected("indented rules");
    while (!accept(TokKind::Dedent)) {
      if (accept(TokKind::Newline)) continue;
      if (at(TokKind::End)) break;
      rs.rules.push_back(rule());
    }
    if (rs.rules.empty()) error_at(loc, "rule set '" + rs.name + "' has no rules");
    return rs;
  }

  void skip_balanced() {
    int depth = 0;
    do {
      if (at(TokKind::End)) expected("')'");
      if (at_op("(")) ++depth;
      if (at_op(")")) --depth;
      next();
    } while (depth > 0);
  }

  Rule rule() {
    Rule r;
    r.loc = peek().loc;
    if (accept_kw("if")) {
      r.hypotheses = hypotheses();
      expect_op(":");
      r.conclusion = atom();
    } else {
      r.conclusion = atom();
      if (accept_kw("if")) r.hypotheses = hypotheses();
    }
    expect_newline();
    return r;
  }

  std::vector<RuleLiteral> hypotheses() {
    std::vector<RuleLiteral> hyps;
    do {
      bool negated = accept_kw("not");
      hyps.push_back(RuleLiteral{atom(), negated});
    } while (accept_op(","));
    return hyps;
  }

  Atom atom() {
    Atom a;
    a.loc = peek().loc;
    if (accept_kw("self")) {
      a.pred.path.push_back("self");
      expect_op(".");
    }
    a.pred.path.push_back(expect_name());
    while (accept_op(".")) a.pred.path.push_back(expect_name());
    if (accept_op("(")) {
      if (!at_op(")")) {
        do a.args.push_back(rule_term());
        while (accept_op(","));
      }
      expect_op(")");
    }
    return a;
  }

  std::optional<Value> constant() {
    const Token& t = peek();
    if (t.kind == TokKind::Int) return int_literal(false);
    if (at_op("-") && peek(1).kind == TokKind::Int) {
      next();
      return int_literal(true);
    }
    if (t.kind == TokKind::Str) {
      next();
      return Value::string(t.text);
    }
    if (accept_kw("True")) return Value::boolean(true);
    if (accept_kw("False")) return Value::boolean(false);
    if (accept_kw("None")) return Value::none();
    return std::nullopt;
  }

  Value int_literal(bool negative) {
    const Token& t = next();
    const std::uint64_t limit = static_cast<std::uint64_t>(INT64_MAX);
    if (negative) {
      if (t.number == limit + 1) return Value::integer(INT64_MIN);
      return Value::integer(-static_cast<std::int64_t>(t.number));
    }
    if (t.number > limit) error_at(t.loc, "integer literal too large");
    return Value::integer(static_cast<std::int64_t>(t.number));
  }

  RuleTerm rule_term() {
    if (auto c = constant()) return *c;
    if (!at_name()) expected("variable or constant");
    std::string name = next().text;
    if (name == "_") return AnyArg{};
    return LogicVar{std::move(name)};
  }

  // ---- classes ------------------------------------------------------------

  ClassDef class_def() {
    SourceLoc loc = next().loc;  // 'class'
    ClassDef c;
    c.loc = loc;
    c.name = expect_name();
    if (accept_kw("extends")) c.base = expect_name();
    expect_op(":");
    expect_newline();
    if (!accept(TokKind::Indent)) expected("indented class body");
    while (!accept(TokKind::Dedent)) {
      if (accept(TokKind::Newline)) continue;
      if (at(TokKind::End)) break;
      if (at_kw("rules")) {
        c.rulesets.push_back(ruleset());
      } else if (at_kw("def") || at_kw("defun")) {
        c.methods.push_back(method());
      } else {
        expected("'def', 'defun' or 'rules' in class body");
      }
    }
    return c;
  }

  Method method() {
    Method m;
    m.loc = peek().loc;
    m.kind = next().text == "defun" ? MethodKind::Defun : MethodKind::Def;
    m.name = expect_name();
    expect_op("(");
    if (!at_op(")")) {
      do m.params.push_back(expect_name());
      while (accept_op(","));
    }
    expect_op(")");
    expect_op(":");
    m.body = block();
    return m;
  }

  // ---- statements ---------------------------------------------------------

  Block block() {
    Block b;
    if (!accept(TokKind::Newline)) {
      b.push_back(simple_statement());
      return b;
    }
    if (!accept(TokKind::Indent)) expected("indented block");
    while (!accept(TokKind::Dedent)) {
      if (accept(TokKind::Newline)) continue;
      if (at(TokKind::End)) break;
      b.push_back(statement());
    }
    return b;
  }

  Stmt statement() {
    if (at_kw("if")) return if_statement();
    if (at_kw("for")) return for_statement();
    if (at_kw("while")) return while_statement();
    if (at_kw("ifSome") || at_kw("whileSome")) return some_statement();
    return simple_statement();
  }

  Stmt if_statement() {
    SourceLoc loc = next().loc;  // 'if' or 'elif'
    bool bare_some = at_kw("some");
    Expr cond = expr();
    expect_op(":");
    Block then_body = block();
    std::optional<Block> else_body;
    if (at_kw("elif")) {
      else_body = Block{if_statement()};
    } else if (accept_kw("else")) {
      expect_op(":");
      else_body = block();
    }
    if (bare_some && !else_body && cond.is<ex::Quant>() &&
        cond.as<ex::Quant>().quantifier == Quantifier::Some) {
      auto& q = cond.as<ex::Quant>();
      return mk_stmt(st::IfSome{std::move(q.iters), std::move(*q.cond), std::move(then_body)}, loc);
    }
    return mk_stmt(st::If{std::move(cond), std::move(then_body), std::move(else_body)}, loc);
  }

  Stmt while_statement() {
    SourceLoc loc = next().loc;
    bool bare_some = at_kw("some");
    Expr cond = expr();
    expect_op(":");
    Block body = block();
    if (bare_some && cond.is<ex::Quant>() &&
        cond.as<ex::Quant>().quantifier == Quantifier::Some) {
      auto& q = cond.as<ex::Quant>();
      return mk_stmt(st::WhileSome{std::move(q.iters), std::move(*q.cond), std::move(body)}, loc);
    }
    return mk_stmt(st::While{std::move(cond), std::move(body)}, loc);
  }

  Stmt some_statement() {
    const Token& kw = next();
    bool is_while = kw.text == "whileSome";
    SourceLoc loc = kw.loc;
    std::vector<Iterator> iters = iterators();
    expect_op("|");
    Expr cond = expr();
    expect_op(":");
    Block body = block();
    if (is_while) return mk_stmt(st::WhileSome{std::move(iters), std::move(cond), std::move(body)}, loc);
    return mk_stmt(st::IfSome{std::move(iters), std::move(cond), std::move(body)}, loc);
  }

  Stmt for_statement() {
    SourceLoc loc = next().loc;
    Pattern p = pattern();
    expect_kw("in");
    Expr domain = expr();
    expect_op(":");
    Block body = block();
    return mk_stmt(st::For{std::move(p), std::move(domain), std::move(body)}, loc);
  }

  Stmt simple_statement() {
    SourceLoc loc = peek().loc;
    if (accept_kw("skip")) {
      expect_newline();
      return mk_stmt(st::Skip{}, loc);
    }
    if (accept_kw("return")) {
      std::optional<Expr> value;
      if (!at(TokKind::Newline) && !at(TokKind::End)) value = expr_list();
      expect_newline();
      return mk_stmt(st::Return{std::move(value)}, loc);
    }
    std::vector<Expr> lhs = exprs();
    if (accept_op(":=") || accept_op("=")) {
      for (const auto& t : lhs) check_target(t);
      std::vector<Expr> rhs = exprs();
      expect_newline();
      if (rhs.size() == 1 && rhs[0].is<ex::Infer>()) {
        return mk_stmt(st::Infer{std::move(lhs), std::move(rhs[0].as<ex::Infer>().call)}, loc);
      }
      if (lhs.size() == 1 && rhs.size() == 1 && rhs[0].is<ex::New>() &&
          !rhs[0].as<ex::New>().setup_args && !lhs[0].is<ex::Tuple>()) {
        return mk_stmt(st::NewObj{std::move(lhs[0]), rhs[0].as<ex::New>().class_name}, loc);
      }
      return mk_stmt(st::Assign{pack(std::move(lhs), loc), pack(std::move(rhs), loc)}, loc);
    }
    expect_newline();
    if (lhs.size() != 1) error_at(loc, "expected assignment");
    if (lhs[0].is<ex::Infer>()) {
      return mk_stmt(st::Infer{{}, std::move(lhs[0].as<ex::Infer>().call)}, loc);
    }
    if (!lhs[0].is<ex::Call>()) error_at(loc, "expression statement must be a call");
    return mk_stmt(st::ExprStmt{std::move(lhs[0])}, loc);
  }

  static Expr pack(std::vector<Expr> es, SourceLoc loc) {
    if (es.size() == 1) return std::move(es[0]);
    return mk(ex::Tuple{std::move(es)}, loc);
  }

  static void check_target(const Expr& e) {
    if (e.is<ex::Var>() || e.is<ex::Field>()) return;
    if (e.is<ex::Tuple>()) {
      for (const auto& x : e.as<ex::Tuple>().elems) check_target(x);
      return;
    }
    error_at(e.loc, "invalid assignment target");
  }

  // ---- expressions --------------------------------------------------------

  // Comma-separated list of full expressions (assignment sides).
  std::vector<Expr> exprs() {
    std::vector<Expr> out;
    out.push_back(expr());
    while (accept_op(",")) out.push_back(expr());
    return out;
  }

  Expr expr_list() {
    SourceLoc loc = peek().loc;
    return pack(exprs(), loc);
  }

  Expr expr() {
    if (at_kw("some") || at_kw("each")) return quantification();
    return or_expr();
  }

  Expr quantification() {
    SourceLoc loc = peek().loc;
    Quantifier q = next().text == "some" ? Quantifier::Some : Quantifier::Each;
    std::vector<Iterator> iters = iterators();
    expect_op("|");
    Expr cond = expr();
    return mk(ex::Quant{q, std::move(iters), std::move(cond)}, loc);
  }

  std::vector<Iterator> iterators() {
    std::vector<Iterator> its;
    do {
      Pattern p = pattern();
      expect_kw("in");
      Expr d = or_expr();
      its.push_back(Iterator{std::move(p), std::move(d)});
    } while (accept_op(","));
    return its;
  }

  Expr or_expr() {
    Expr e = and_expr();
    while (at_kw("or")) {
      SourceLoc loc = next().loc;
      e = binary(BinaryOp::Or, std::move(e), and_expr(), loc);
    }
    return e;
  }

  Expr and_expr() {
    Expr e = not_expr();
    while (at_kw("and")) {
      SourceLoc loc = next().loc;
      e = binary(BinaryOp::And, std::move(e), not_expr(), loc);
    }
    return e;
  }

  Expr not_expr() {
    if (at_kw("not")) {
      SourceLoc loc = next().loc;
      return unary(UnaryOp::Not, not_expr(), loc);
    }
    return comparison();
  }

  std::optional<BinaryOp> comparison_op() {
    if (at_kw("in")) {
      next();
      return BinaryOp::In;
    }
    if (at_kw("not") && at_kw("in", 1)) {
      next();
      next();
      return BinaryOp::NotIn;
    }
    if (at_kw("is")) {
      next();
      return accept_kw("not") ? BinaryOp::IsNot : BinaryOp::Is;
    }
    static const std::pair<const char*, BinaryOp> ops[] = {
        {"==", BinaryOp::Is}, {"!=", BinaryOp::IsNot}, {"<", BinaryOp::Lt},
        {"<=", BinaryOp::Le}, {">", BinaryOp::Gt},     {">=", BinaryOp::Ge}};
    for (auto [text, op] : ops) {
      if (accept_op(text)) return op;
    }
    return std::nullopt;
  }

  Expr comparison() {
    Expr e = additive();
    SourceLoc loc = peek().loc;
    if (auto op = comparison_op()) e = binary(*op, std::move(e), additive(), loc);
    return e;
  }

  Expr additive() {
    Expr e = multiplicative();
    while (at_op("+") || at_op("-")) {
      const Token& t = next();
      BinaryOp op = t.text == "+" ? BinaryOp::Add : BinaryOp::Sub;
      e = binary(op, std::move(e), multiplicative(), t.loc);
    }
    return e;
  }

  Expr multiplicative() {
    Expr e = unary_expr();
    while (at_op("*") || at_op("/") || at_op("%")) {
      const Token& t = next();
      BinaryOp op = t.text == "*" ? BinaryOp::Mul : t.text == "/" ? BinaryOp::Div : BinaryOp::Mod;
      e = binary(op, std::move(e), unary_expr(), t.loc);
    }
    return e;
  }

  Expr unary_expr() {
    SourceLoc loc = peek().loc;
    if (at_op("-")) {
      if (peek(1).kind == TokKind::Int) {
        next();
        return postfix(lit(int_literal(true), loc));
      }
      next();
      return unary(UnaryOp::Neg, unary_expr(), loc);
    }
    static const std::pair<const char*, AggregateOp> aggs[] = {
        {"count", AggregateOp::Count}, {"max", AggregateOp::Max},
        {"min", AggregateOp::Min}, {"sum", AggregateOp::Sum}};
    for (auto [kw, op] : aggs) {
      if (accept_kw(kw)) return mk(ex::Aggregate{op, postfix(primary())}, loc);
    }
    return postfix(primary());
  }

  Expr postfix(Expr e) {
    while (at_op(".")) {
      SourceLoc loc = next().loc;
      if (accept_kw("infer")) {
        InferCall call = infer_args();
        call.target = std::move(e);
        e = mk(ex::Infer{std::move(call)}, loc);
        continue;
      }
      std::string name = expect_name();
      if (at_op("(")) {
        std::vector<Expr> args = call_args();
        e = mk(ex::Call{CallKind::Method, std::move(e), std::move(name), std::move(args)}, loc);
      } else {
        e = field(std::move(e), std::move(name), loc);
      }
    }
    return e;
  }

  std::vector<Expr> call_args() {
    expect_op("(");
    std::vector<Expr> args;
    if (!at_op(")")) {
      do args.push_back(expr());
      while (accept_op(","));
    }
    expect_op(")");
    return args;
  }

  Expr primary() {
    SourceLoc loc = peek().loc;
    if (auto c = constant()) return lit(std::move(*c), loc);
    if (accept_kw("self")) return mk(ex::SelfRef{}, loc);
    if (at_op("(")) return paren_expr();
    if (at_op("{")) return brace_expr();
    if (accept_kw("infer")) return mk(ex::Infer{infer_args()}, loc);
    if (accept_kw("new")) return new_expr(loc);
    if (at_kw("some") || at_kw("each")) return quantification();
    if (at_name()) return name_expr();
    expected("expression");
  }

  Expr paren_expr() {
    SourceLoc loc = next().loc;  // '('
    if (accept_op(")")) return mk(ex::Tuple{}, loc);
    Expr first = expr();
    if (accept_op(")")) return first;
    std::vector<Expr> elems;
    elems.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_op(")")) break;
      elems.push_back(expr());
    }
    expect_op(")");
    return mk(ex::Tuple{std::move(elems)}, loc);
  }

  Expr brace_expr() {
    SourceLoc loc = next().loc;  // '{'
    if (accept_op("}")) return mk(ex::SetLit{}, loc);
    // A quantified element needs parentheses so it cannot swallow the ':'.
    Expr first = or_expr();
    if (accept_op(":")) {
      std::vector<Iterator> iters = iterators();
      std::optional<Box<Expr>> cond;
      if (accept_op("|")) cond = expr();
      expect_op("}");
      return mk(ex::Comprehension{std::move(first), std::move(iters), std::move(cond)}, loc);
    }
    std::vector<Expr> elems;
    elems.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_op("}")) break;
      elems.push_back(expr());
    }
    expect_op("}");
    return mk(ex::SetLit{std::move(elems)}, loc);
  }

  Expr new_expr(SourceLoc loc) {
    if (at_name()) return mk(ex::New{next().text, std::nullopt}, loc);
    expect_op("(");
    std::string cls = expect_name();
    std::vector<Expr> args;
    if (accept_op(",")) {
      expect_op("[");
      if (!at_op("]")) {
        do args.push_back(expr());
        while (accept_op(","));
      }
      expect_op("]");
    }
    expect_op(")");
    return mk(ex::New{std::move(cls), std::move(args)}, loc);
  }

  Expr name_expr() {
    const Token& t = next();
    SourceLoc loc = t.loc;
    const std::string& name = t.text;
    if (name == "_") error_at(loc, "wildcard '_' is only allowed in patterns and queries");
    if (!at_op("(")) return var(name, VarKind::Unresolved, loc);

    if (name == "super") {
      expect_op("(");
      expect_op(")");
      expect_op(".");
      std::string m = expect_name();
      return mk(ex::Call{CallKind::Super, std::nullopt, std::move(m), call_args()}, loc);
    }
    if (name == "isinstance") {
      expect_op("(");
      Expr e = expr();
      expect_op(",");
      std::string cls = expect_name();
      expect_op(")");
      return mk(ex::IsInstance{std::move(e), std::move(cls)}, loc);
    }
    if (name == "len" || name == "isTuple") {
      std::vector<Expr> args = call_args();
      if (args.size() != 1) error_at(loc, name + " takes one argument");
      return unary(name == "len" ? UnaryOp::Len : UnaryOp::IsTuple, std::move(args[0]), loc);
    }
    if (name == "select") {
      std::vector<Expr> args = call_args();
      if (args.size() != 2) error_at(loc, "select takes two arguments");
      return binary(BinaryOp::Select, std::move(args[0]), std::move(args[1]), loc);
    }
    CallKind kind = (name == "print" || name == "load_facts") ? CallKind::Builtin : CallKind::Implicit;
    return mk(ex::Call{kind, std::nullopt, name, call_args()}, loc);
  }

  // ---- patterns -----------------------------------------------------------

  Pattern pattern() {
    SourceLoc loc = peek().loc;
    if (at_name() && peek().text == "_") {
      next();
      return mk_pat(pat::Wildcard{}, loc);
    }
    if (at_name() && !at_op(".", 1) && !at_op("(", 1)) {
      return mk_pat(pat::Var{var(next().text, VarKind::Unresolved, loc)}, loc);
    }
    if (accept_op("=")) {
      Expr v = postfix(primary());
      if (!v.is<ex::Var>() && !v.is<ex::Field>()) error_at(loc, "'=' must prefix a variable");
      return mk_pat(pat::Bound{std::move(v)}, loc);
    }
    if (accept_op("(")) {
      if (accept_op(")")) return mk_pat(pat::Tuple{}, loc);
      Pattern first = pattern();
      if (accept_op(")")) return first;
      std::vector<Pattern> elems;
      elems.push_back(std::move(first));
      while (accept_op(",")) {
        if (at_op(")")) break;
        elems.push_back(pattern());
      }
      expect_op(")");
      return mk_pat(pat::Tuple{std::move(elems)}, loc);
    }
    return mk_pat(pat::Const{additive()}, loc);
  }

  // ---- infer --------------------------------------------------------------

  InferCall infer_args() {
    InferCall call;
    expect_op("(");
    bool have_rules = false;
    if (!at_op(")")) {
      do {
        if (accept_kw("rules")) {
          expect_op("=");
          call.ruleset = expect_name();
          have_rules = true;
        } else if (at_name() && at_op("=", 1)) {
          std::string name = next().text;
          next();
          call.kwargs.push_back(KwArg{std::move(name), expr()});
        } else {
          call.queries.push_back(query());
        }
      } while (accept_op(","));
    }
    expect_op(")");
    if (!have_rules) error("infer requires rules=<rule set>");
    return call;
  }

  Query query() {
    Query q;
    q.loc = peek().loc;
    q.predicate = expect_name();
    if (!accept_op("(")) return q;
    q.args.emplace();
    if (!at_op(")")) {
      do q.args->push_back(query_arg());
      while (accept_op(","));
    }
    expect_op(")");
    return q;
  }

  QueryArg query_arg() {
    if (auto c = constant()) return QueryArg{QueryArg::Const{std::move(*c)}};
    if (accept_op("=")) {
      SourceLoc loc = peek().loc;
      Expr v = postfix(primary());
      if (!v.is<ex::Var>() && !v.is<ex::Field>()) error_at(loc, "'=' must prefix a variable");
      return QueryArg{QueryArg::BoundVar{std::move(v)}};
    }
    std::string name = expect_name();
    if (name == "_") return QueryArg{QueryArg::Wildcard{}};
    return QueryArg{QueryArg::FreeVar{std::move(name)}};
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Program parse_program(std::string_view text) {
  Program p = Parser(detail::tokenize(text)).program();
  check_well_formed(p);
  return p;
}

}  // namespace alda
