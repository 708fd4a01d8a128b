#include "alda/ast.hpp"

namespace alda::ast {

std::string PredicateRef::key() const {
  std::string s = scope == Scope::Self ? "self" : "";
  for (const auto& part : path) {
    if (!s.empty()) s += '.';
    s += part;
  }
  return s;
}

Expr lit(Value v, SourceLoc loc) { return mk(ex::Literal{std::move(v)}, loc); }

Expr var(std::string name, VarKind kind, SourceLoc loc) {
  return mk(ex::Var{std::move(name), kind}, loc);
}

Expr field(Expr object, std::string name, SourceLoc loc) {
  return mk(ex::Field{std::move(object), std::move(name)}, loc);
}

Expr global(std::string name, SourceLoc loc) {
  return field(mk(ex::GlobalsRef{}, loc), std::move(name), loc);
}

Expr unary(UnaryOp op, Expr e, SourceLoc loc) { return mk(ex::Unary{op, std::move(e)}, loc); }

Expr binary(BinaryOp op, Expr l, Expr r, SourceLoc loc) {
  return mk(ex::Binary{op, std::move(l), std::move(r)}, loc);
}

Expr kernel_not(Expr e) {
  auto loc = e.loc;
  return unary(UnaryOp::Not, std::move(e), loc);
}

Expr kernel_and(Expr a, Expr b) {
  auto loc = a.loc;
  return kernel_not(binary(BinaryOp::Or, kernel_not(std::move(a)), kernel_not(std::move(b)), loc));
}

}  // namespace alda::ast
