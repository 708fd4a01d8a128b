#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "alda/ast.hpp"

namespace alda::detail {

using ExprFn = std::function<void(ast::Expr&)>;
using ConstExprFn = std::function<void(const ast::Expr&)>;

/// Immediate sub-expressions, including those inside iterators, patterns,
/// infer calls and keyword arguments, in evaluation order.
void for_each_child(ast::Expr& e, const ExprFn& f);
void for_each_child(const ast::Expr& e, const ConstExprFn& f);

void for_each_pattern_expr(ast::Pattern& p, const ExprFn& f);
void for_each_pattern_expr(const ast::Pattern& p, const ConstExprFn& f);

/// Expressions a statement evaluates itself (not those of nested blocks).
void for_each_stmt_expr(ast::Stmt& s, const ExprFn& f);
void for_each_stmt_expr(const ast::Stmt& s, const ConstExprFn& f);

/// Nested blocks of a statement.
void for_each_block(ast::Stmt& s, const std::function<void(ast::Block&)>& f);
void for_each_block(const ast::Stmt& s, const std::function<void(const ast::Block&)>& f);

/// Pre-order over every expression under e (e included).
void visit_exprs(const ast::Expr& e, const ConstExprFn& f);
/// Pre-order over every expression in a block, recursively.
void visit_exprs(const ast::Block& b, const ConstExprFn& f);
void visit_stmts(const ast::Block& b, const std::function<void(const ast::Stmt&)>& f);

bool any_expr(const ast::Expr& e, const std::function<bool(const ast::Expr&)>& pred);

/// Names of variables a pattern binds (pat::Var whose variable is a plain Var).
void pattern_vars(const ast::Pattern& p, std::vector<ast::Expr>& out);

/// Generates identifiers containing '$', which source programs cannot spell,
/// numbered past any already present in the program.
class FreshNames {
 public:
  explicit FreshNames(const ast::Program& p);
  std::string fresh(std::string_view base);

 private:
  std::size_t next_ = 1;
};

/// Structural substitution of whole sub-expressions. Bound variables
/// introduced by quantifiers, comprehensions and for loops shadow matching
/// keys of the form Var(name, Bound) inside their scope.
using Subst = std::vector<std::pair<ast::Expr, ast::Expr>>;
ast::Expr substitute(const ast::Expr& e, const Subst& theta);
ast::Pattern substitute(const ast::Pattern& p, const Subst& theta);
ast::Block substitute(const ast::Block& b, const Subst& theta);

/// Every identifier spelled in the program (variables, fields, methods,
/// classes, rule sets, predicates, logic variables, query variables).
std::set<std::string> all_identifiers(const ast::Program& p);

}  // namespace alda::detail
