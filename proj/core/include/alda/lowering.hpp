#pragma once

#include <string>
#include <vector>

#include "alda/ast.hpp"

// Translation of the surface language into the kernel. Each pass takes and
// returns a whole program, can be run on its own, and leaves programs it has
// nothing to do for unchanged, so running the pipeline twice is the same as
// running it once. Errors are CompileError with stage Lowering.
namespace alda::lowering {

/// Rename every class rule set rs of class C to "C.rs" and make infer calls
/// inside methods refer to the renamed set along the class chain.
ast::Program unique_ruleset_names(ast::Program p);

/// Resolve every identifier: bound variable, parameter, self field, global
/// (rewritten to a field of the globals object), or method local. Moves
/// global rule sets into the globals class, resolves rule-set predicates,
/// gives implicit infer calls their target, and turns bare calls into self
/// method calls.
ast::Program globals_to_fields(ast::Program p, const std::vector<std::string>& extra_globals = {});

/// `and` to not/or, `each` to not some not, several iterators to nested some.
ast::Program boolean_ops(ast::Program p);

/// Set literals, comprehensions, infer and new in expression position become
/// statements on fresh temporaries placed before the statement. Multi-target
/// assignment goes through a temporary tuple.
ast::Program hoist_effects(ast::Program p);

/// Non-variable expressions in patterns are evaluated once, before the
/// statement, into a fresh variable matched with =v.
ast::Program pattern_exprs(ast::Program p);

/// Wildcards in patterns become fresh variables.
ast::Program wildcards(ast::Program p);

/// Query patterns in infer calls become bare queries plus comprehensions.
ast::Program infer_patterns(ast::Program p);

/// ifSome and whileSome become for loops guarded by a fresh flag.
ast::Program some_statements(ast::Program p);

/// Comprehension assignments become loops adding to a fresh set.
ast::Program comprehensions(ast::Program p);

/// Tuple patterns in for and some become selects and guards.
ast::Program iterator_patterns(ast::Program p);

/// Verifies the kernel invariants and that every lowering-introduced name
/// (those containing '$') is distinct from every source name.
void audit_kernel(const ast::Program& p);

/// All passes in order, then the audit. `extra_globals` names globals bound
/// from outside the program (fact files) so methods and rule sets see them.
ast::Program lower(ast::Program p, const std::vector<std::string>& extra_globals = {});

/// Global variable names used by a lowered program, sorted.
std::vector<std::string> global_names(const ast::Program& lowered);

}  // namespace alda::lowering
