#include <cctype>
#include <sstream>

#include "alda/parser.hpp"

namespace alda {

using namespace ast;

namespace {

// Binding strength, loosest first. An operand printed where a tighter level
// is required gets parentheses.
enum Prec : int {
  kQuant = 0,
  kOr = 1,
  kAnd = 2,
  kNot = 3,
  kCompare = 4,
  kAdd = 5,
  kMul = 6,
  kUnary = 7,
  kPostfix = 8,
  kPrimary = 9,
};

int binary_prec(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return kOr;
    case BinaryOp::And: return kAnd;
    case BinaryOp::Add:
    case BinaryOp::Sub: return kAdd;
    case BinaryOp::Mul:
    case BinaryOp::Div:
    case BinaryOp::Mod: return kMul;
    case BinaryOp::Select: return kPrimary;
    default: return kCompare;
  }
}

const char* binary_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return "or";
    case BinaryOp::And: return "and";
    case BinaryOp::Is: return "is";
    case BinaryOp::IsNot: return "is not";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::In: return "in";
    case BinaryOp::NotIn: return "not in";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Select: return "select";
  }
  return "?";
}

const char* aggregate_text(AggregateOp op) {
  switch (op) {
    case AggregateOp::Count: return "count";
    case AggregateOp::Max: return "max";
    case AggregateOp::Min: return "min";
    case AggregateOp::Sum: return "sum";
  }
  return "?";
}

class Printer {
 public:
  std::string expr(const Expr& e, int min_prec = kQuant) {
    int p = prec(e);
    std::string s = expr_body(e);
    return p < min_prec ? "(" + s + ")" : s;
  }

  std::string pattern(const Pattern& p) {
    return std::visit(
        [&](const auto& n) -> std::string {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, pat::Var>) {
            return expr(*n.var);
          } else if constexpr (std::is_same_v<N, pat::Bound>) {
            return "=" + expr(*n.var, kPostfix);
          } else if constexpr (std::is_same_v<N, pat::Wildcard>) {
            return "_";
          } else if constexpr (std::is_same_v<N, pat::Tuple>) {
            std::string s = "(";
            for (std::size_t i = 0; i < n.elems.size(); ++i) {
              if (i) s += ", ";
              s += pattern(n.elems[i]);
            }
            if (n.elems.size() == 1) s += ",";
            return s + ")";
          } else {
            return expr(*n.expr, kAdd);
          }
        },
        p.node);
  }

  std::string iterators(const std::vector<Iterator>& its) {
    std::string s;
    for (std::size_t i = 0; i < its.size(); ++i) {
      if (i) s += ", ";
      s += pattern(*its[i].pattern) + " in " + expr(*its[i].domain, kOr);
    }
    return s;
  }

  std::string infer(const InferCall& c) {
    std::string s = c.target ? expr(**c.target, kPostfix) + "." : "";
    s += "infer(";
    bool first = true;
    auto sep = [&] {
      if (!first) s += ", ";
      first = false;
    };
    for (const auto& q : c.queries) {
      sep();
      s += q.predicate;
      if (!q.args) continue;
      s += "(";
      for (std::size_t i = 0; i < q.args->size(); ++i) {
        if (i) s += ", ";
        s += query_arg((*q.args)[i]);
      }
      s += ")";
    }
    for (const auto& kw : c.kwargs) {
      sep();
      s += kw.name + "=" + expr(*kw.value);
    }
    sep();
    return s + "rules=" + c.ruleset + ")";
  }

  std::string atom(const Atom& a) {
    std::string s = a.pred.key() + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      if (i) s += ", ";
      s += std::visit(
          [](const auto& t) -> std::string {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, LogicVar>) return t.name;
            else if constexpr (std::is_same_v<T, AnyArg>) return "_";
            else return to_string(t);
          },
          a.args[i]);
    }
    return s + ")";
  }

  std::string rule(const Rule& r) {
    std::string s = atom(r.conclusion);
    for (std::size_t i = 0; i < r.hypotheses.size(); ++i) {
      s += i ? ", " : " if ";
      if (r.hypotheses[i].negated) s += "not ";
      s += atom(r.hypotheses[i].atom);
    }
    return s;
  }

  void ruleset(const RuleSetDef& rs, int indent) {
    line(indent, "rules " + rs.name + ":");
    for (const auto& r : rs.rules) line(indent + 1, rule(r));
  }

  void block(const Block& b, int indent) {
    if (b.empty()) line(indent, "skip");
    for (const auto& s : b) stmt(s, indent);
  }

  void program(const Program& p) {
    for (const auto& rs : p.rulesets) ruleset(rs, 0);
    for (const auto& c : p.classes) {
      line(0, "class " + c.name + (c.base ? " extends " + *c.base : "") + ":");
      for (const auto& rs : c.rulesets) ruleset(rs, 1);
      for (const auto& m : c.methods) {
        std::string head = m.kind == MethodKind::Defun ? "defun " : "def ";
        head += m.name + "(";
        for (std::size_t i = 0; i < m.params.size(); ++i) {
          if (i) head += ", ";
          head += m.params[i];
        }
        line(1, head + "):");
        block(m.body, 2);
      }
    }
    block(p.top, 0);
  }

  std::string str() const { return out_.str(); }

 private:
  static int prec(const Expr& e) {
    return std::visit(
        [](const auto& n) -> int {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, ex::Literal>) {
            return n.value.is_int() && n.value.as_int() < 0 ? kUnary : kPrimary;
          } else if constexpr (std::is_same_v<N, ex::Field>) {
            return kPostfix;
          } else if constexpr (std::is_same_v<N, ex::Unary>) {
            if (n.op == UnaryOp::Not) return kNot;
            if (n.op == UnaryOp::Neg) return kUnary;
            return kPrimary;
          } else if constexpr (std::is_same_v<N, ex::Binary>) {
            return binary_prec(n.op);
          } else if constexpr (std::is_same_v<N, ex::Quant>) {
            return kQuant;
          } else if constexpr (std::is_same_v<N, ex::Aggregate>) {
            return kUnary;
          } else if constexpr (std::is_same_v<N, ex::Call>) {
            return n.kind == CallKind::Method ? kPostfix : kPrimary;
          } else if constexpr (std::is_same_v<N, ex::Infer>) {
            return n.call.target ? kPostfix : kPrimary;
          } else {
            return kPrimary;
          }
        },
        e.node);
  }

  std::string args(const std::vector<Expr>& es) {
    std::string s;
    for (std::size_t i = 0; i < es.size(); ++i) {
      if (i) s += ", ";
      s += expr(es[i]);
    }
    return s;
  }

  std::string expr_body(const Expr& e) {
    return std::visit(
        [&](const auto& n) -> std::string {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, ex::Literal>) {
            return to_string(n.value);
          } else if constexpr (std::is_same_v<N, ex::Var>) {
            return n.name;
          } else if constexpr (std::is_same_v<N, ex::SelfRef>) {
            return "self";
          } else if constexpr (std::is_same_v<N, ex::GlobalsRef>) {
            return "globals";
          } else if constexpr (std::is_same_v<N, ex::Field>) {
            return expr(*n.object, kPostfix) + "." + n.name;
          } else if constexpr (std::is_same_v<N, ex::Tuple>) {
            std::string s = "(" + args(n.elems);
            if (n.elems.size() == 1) s += ",";
            return s + ")";
          } else if constexpr (std::is_same_v<N, ex::Unary>) {
            switch (n.op) {
              case UnaryOp::Not: return "not " + expr(*n.operand, kNot);
              case UnaryOp::Neg:
              {
                // -(5) and -(5.f) keep negation distinct from the literal -5.
                std::string inner = expr(*n.operand, kUnary);
                if (!inner.empty() && std::isdigit(static_cast<unsigned char>(inner[0]))) {
                  return "-(" + inner + ")";
                }
                return "-" + inner;
              }
              case UnaryOp::IsTuple: return "isTuple(" + expr(*n.operand) + ")";
              case UnaryOp::Len: return "len(" + expr(*n.operand) + ")";
            }
            return "?";
          } else if constexpr (std::is_same_v<N, ex::Binary>) {
            if (n.op == BinaryOp::Select) {
              return "select(" + expr(*n.lhs) + ", " + expr(*n.rhs) + ")";
            }
            int p = binary_prec(n.op);
            // Left-associative chains; comparisons do not chain at all.
            int lp = p == kCompare ? p + 1 : p;
            return expr(*n.lhs, lp) + " " + binary_text(n.op) + " " + expr(*n.rhs, p + 1);
          } else if constexpr (std::is_same_v<N, ex::IsInstance>) {
            return "isinstance(" + expr(*n.operand) + ", " + n.class_name + ")";
          } else if constexpr (std::is_same_v<N, ex::Quant>) {
            return std::string(n.quantifier == Quantifier::Some ? "some " : "each ") +
                   iterators(n.iters) + " | " + expr(*n.cond);
          } else if constexpr (std::is_same_v<N, ex::Aggregate>) {
            return std::string(aggregate_text(n.op)) + " " + expr(*n.operand, kPostfix);
          } else if constexpr (std::is_same_v<N, ex::Call>) {
            switch (n.kind) {
              case CallKind::Method:
                return expr(**n.target, kPostfix) + "." + n.method + "(" + args(n.args) + ")";
              case CallKind::Super: return "super()." + n.method + "(" + args(n.args) + ")";
              default: return n.method + "(" + args(n.args) + ")";
            }
          } else if constexpr (std::is_same_v<N, ex::SetLit>) {
            return "{" + args(n.elems) + "}";
          } else if constexpr (std::is_same_v<N, ex::Comprehension>) {
            std::string s = "{" + expr(*n.elem, kOr) + ": " + iterators(n.iters);
            if (n.cond) s += " | " + expr(**n.cond);
            return s + "}";
          } else if constexpr (std::is_same_v<N, ex::Infer>) {
            return infer(n.call);
          } else {
            static_assert(std::is_same_v<N, ex::New>);
            if (!n.setup_args) return "new " + n.class_name;
            return "new(" + n.class_name + ", [" + args(*n.setup_args) + "])";
          }
        },
        e.node);
  }

  std::string query_arg(const QueryArg& a) {
    return std::visit(
        [&](const auto& n) -> std::string {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, QueryArg::Const>) return to_string(n.value);
          else if constexpr (std::is_same_v<N, QueryArg::BoundVar>) return "=" + expr(*n.var, kPostfix);
          else if constexpr (std::is_same_v<N, QueryArg::FreeVar>) return n.name;
          else return "_";
        },
        a.node);
  }

  // Top-level sides of an assignment drop the parentheses of a 2+ tuple.
  std::string side(const Expr& e) {
    if (e.is<ex::Tuple>() && e.as<ex::Tuple>().elems.size() >= 2) return args(e.as<ex::Tuple>().elems);
    return expr(e);
  }

  // Conditions that are themselves quantifications are parenthesized so that
  // `if some ...:` stays reserved for the witness-binding form.
  std::string cond(const Expr& e) { return e.is<ex::Quant>() ? "(" + expr(e) + ")" : expr(e); }

  void stmt(const Stmt& s, int indent) {
    std::visit(
        [&](const auto& n) {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, st::Skip>) {
            line(indent, "skip");
          } else if constexpr (std::is_same_v<N, st::Assign>) {
            line(indent, side(n.target) + " := " + side(n.value));
          } else if constexpr (std::is_same_v<N, st::NewObj>) {
            line(indent, expr(n.target) + " := new " + n.class_name);
          } else if constexpr (std::is_same_v<N, st::Infer>) {
            std::string lhs = args(n.targets);
            line(indent, (lhs.empty() ? "" : lhs + " := ") + infer(n.call));
          } else if constexpr (std::is_same_v<N, st::If>) {
            line(indent, "if " + cond(n.cond) + ":");
            block(n.then_body, indent + 1);
            if (n.else_body) {
              line(indent, "else:");
              block(*n.else_body, indent + 1);
            }
          } else if constexpr (std::is_same_v<N, st::For>) {
            line(indent, "for " + pattern(n.pattern) + " in " + expr(n.domain) + ":");
            block(n.body, indent + 1);
          } else if constexpr (std::is_same_v<N, st::While>) {
            line(indent, "while " + cond(n.cond) + ":");
            block(n.body, indent + 1);
          } else if constexpr (std::is_same_v<N, st::IfSome>) {
            line(indent, "ifSome " + iterators(n.iters) + " | " + expr(n.cond) + ":");
            block(n.body, indent + 1);
          } else if constexpr (std::is_same_v<N, st::WhileSome>) {
            line(indent, "whileSome " + iterators(n.iters) + " | " + expr(n.cond) + ":");
            block(n.body, indent + 1);
          } else if constexpr (std::is_same_v<N, st::ExprStmt>) {
            line(indent, expr(n.expr));
          } else {
            static_assert(std::is_same_v<N, st::Return>);
            line(indent, n.value ? "return " + side(*n.value) : "return");
          }
        },
        s.node);
  }

  void line(int indent, const std::string& text) {
    out_ << std::string(static_cast<std::size_t>(indent) * 2, ' ') << text << '\n';
  }

  std::ostringstream out_;
};

}  // namespace

std::string pretty_print(const Program& program) {
  Printer p;
  p.program(program);
  return p.str();
}

std::string pretty_print(const Expr& expr) { return Printer().expr(expr); }

std::string pretty_print(const Block& block, int indent) {
  Printer p;
  p.block(block, indent);
  return p.str();
}

std::string pretty_print(const Rule& rule) { return Printer().rule(rule); }

}  // namespace alda
