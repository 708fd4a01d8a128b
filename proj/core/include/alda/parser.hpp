#pragma once

#include <string>
#include <string_view>

#include "alda/ast.hpp"

namespace alda {

/// Parses indentation-structured source into a surface AST and runs the
/// parse-stage well-formedness checks (unique class/method/rule-set names,
/// safe rules, one arity per predicate).
///
/// Throws CompileError carrying the first problem found, with line/column.
ast::Program parse_program(std::string_view text);

/// Parse-stage checks alone, for ASTs built in memory.
void check_well_formed(const ast::Program& program);

/// Canonical source text. parse_program(pretty_print(p)) == p for every
/// well-formed surface program. Kernel-only nodes (the globals object,
/// resolved variables) print readably but are not meant to be reparsed.
std::string pretty_print(const ast::Program& program);
std::string pretty_print(const ast::Expr& expr);
std::string pretty_print(const ast::Block& block, int indent = 0);
std::string pretty_print(const ast::Rule& rule);

}  // namespace alda
