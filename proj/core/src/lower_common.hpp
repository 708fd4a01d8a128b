#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "alda/ast.hpp"
#include "alda/diagnostics.hpp"
#include "alda/heap.hpp"
#include "ast_util.hpp"

namespace alda::detail {

[[noreturn]] inline void lowering_error(std::string code, std::string message, SourceLoc loc) {
  throw CompileError(Diagnostic::Stage::Lowering, std::move(code), std::move(message), loc);
}

/// Mutable pre-order walk over every expression in a block, nested blocks included.
inline void for_all_exprs(ast::Block& b, const ExprFn& f) {
  std::function<void(ast::Expr&)> go = [&](ast::Expr& e) {
    f(e);
    for_each_child(e, go);
  };
  for (auto& s : b) {
    for_each_stmt_expr(s, go);
    for_each_block(s, [&](ast::Block& inner) { for_all_exprs(inner, f); });
  }
}

inline void for_all_stmts(ast::Block& b, const std::function<void(ast::Stmt&)>& f) {
  for (auto& s : b) {
    f(s);
    for_each_block(s, [&](ast::Block& inner) { for_all_stmts(inner, f); });
  }
}

/// Applies `f` to the top-level block and every method body.
inline void for_all_blocks(ast::Program& p, const std::function<void(ast::Block&)>& f) {
  for (auto& c : p.classes) {
    for (auto& m : c.methods) f(m.body);
  }
  f(p.top);
}

/// Rewrites each block bottom-up: nested blocks first, then `f` maps one
/// statement of the enclosing block to its replacement statements.
inline void rewrite_stmts(ast::Block& b, const std::function<void(ast::Stmt&, ast::Block&)>& f) {
  ast::Block out;
  out.reserve(b.size());
  for (auto& s : b) {
    for_each_block(s, [&](ast::Block& inner) { rewrite_stmts(inner, f); });
    f(s, out);
  }
  b = std::move(out);
}

inline void rewrite_program(ast::Program& p,
                            const std::function<void(ast::Stmt&, ast::Block&)>& f) {
  for_all_blocks(p, [&](ast::Block& b) { rewrite_stmts(b, f); });
}

class ClassTable {
 public:
  explicit ClassTable(const ast::Program& p) {
    for (const auto& c : p.classes) by_name_[c.name] = &c;
  }

  const ast::ClassDef* find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : it->second;
  }

  /// The class, then its ancestors.
  std::vector<std::string> chain(const std::string& name) const {
    std::vector<std::string> out;
    for (const auto* c = find(name); c; c = c->base ? find(*c->base) : nullptr) {
      out.push_back(c->name);
    }
    return out;
  }

  bool is_subclass(const std::string& sub, const std::string& sup) const {
    auto ch = chain(sub);
    return std::find(ch.begin(), ch.end(), sup) != ch.end();
  }

  /// The class, its ancestors and its descendants.
  std::vector<std::string> family(const std::string& name) const {
    auto out = chain(name);
    for (const auto& [n, c] : by_name_) {
      if (n != name && is_subclass(n, name)) out.push_back(n);
    }
    return out;
  }

  /// First definition of method `m` along the chain starting at `name`.
  const ast::Method* method(const std::string& name, const std::string& m) const {
    for (const auto& k : chain(name)) {
      for (const auto& meth : find(k)->methods) {
        if (meth.name == m) return &meth;
      }
    }
    return nullptr;
  }

 private:
  std::map<std::string, const ast::ClassDef*> by_name_;
};

}  // namespace alda::detail
