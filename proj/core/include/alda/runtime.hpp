#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "alda/analysis.hpp"
#include "alda/ast.hpp"
#include "alda/datalog.hpp"
#include "alda/heap.hpp"

namespace alda {

/// A rule set ready to run: analyzed, stratified, join plans built.
struct CompiledRuleSet {
  std::string name;   // qualified, e.g. "HierRBAC.trans_rs"
  std::string owner;  // class that defines it
  RuleSetInfo info;
  std::shared_ptr<const datalog::RuleProgram> program;
  std::vector<std::string> nonlocal_base;     // keys, sorted
  std::vector<std::string> nonlocal_derived;  // keys, sorted
  std::set<std::string> maintained;           // derived keys defined by non-local bases alone
};

/// A lowered program with everything the interpreter needs. Move-only: the
/// update-site report points into `kernel`.
struct CompiledProgram {
  ast::Program kernel;
  std::map<std::string, CompiledRuleSet> rulesets;
  UpdateSiteReport sites;
  std::vector<std::string> globals;

  CompiledProgram() = default;
  CompiledProgram(CompiledProgram&&) = default;
  CompiledProgram& operator=(CompiledProgram&&) = default;
  CompiledProgram(const CompiledProgram&) = delete;
  CompiledProgram& operator=(const CompiledProgram&) = delete;
};

/// Lowers, analyzes and prepares `source`. Throws CompileError for lowering
/// problems, unstratifiable rule sets, and statically provable writes to
/// derived predicates.
std::unique_ptr<CompiledProgram> compile(const ast::Program& source,
                                         const std::vector<std::string>& extra_globals = {});

enum class MaintenancePolicy {
  EveryMutation,  // after every statement that changed the heap
  Flagged,        // only after statements flagged by update-site analysis
};

/// One implicit inference run by maintenance.
struct MaintenanceEvent {
  std::string ruleset;
  Address object;
  struct Delta {
    std::string predicate;
    std::size_t added = 0;
    std::size_t removed = 0;
  };
  std::vector<Delta> deltas;
};

struct RunOptions {
  MaintenancePolicy policy = MaintenancePolicy::EveryMutation;
  /// Shuffles set iteration order; nullopt iterates in insertion order.
  std::optional<std::uint64_t> seed;
  std::ostream* out = nullptr;  // print(); defaults to std::cout
  std::function<void(const MaintenanceEvent&)> on_maintain;
  /// Global variables bound to fresh sets before the program starts.
  std::vector<std::pair<std::string, std::vector<Value>>> global_sets;
  /// Called after every statement completes, maintenance included.
  std::function<void(const class Interpreter&, const ast::Stmt&)> after_statement;
  /// Backs the load_facts builtin.
  std::function<std::vector<Value>(const std::string& path)> load_facts;
};

struct RunStats {
  std::size_t maintain_calls = 0;  // maintenance passes started
  std::size_t inferences = 0;      // rule-set evaluations, implicit and explicit
  std::size_t statements = 0;
};

/// Big-step interpreter over a compiled program. Runtime failures are thrown
/// as RuntimeError carrying the location of the failing construct.
class Interpreter {
 public:
  Interpreter(const CompiledProgram& program, RunOptions options = {});
  ~Interpreter();
  Interpreter(const Interpreter&) = delete;
  Interpreter& operator=(const Interpreter&) = delete;

  /// Executes the top-level statements.
  void run();

  const Heap& heap() const;
  Address globals() const;
  const RunStats& stats() const;

  /// Value of global variable `name`, or nullopt when unset.
  std::optional<Value> global(const std::string& name) const;

  /// Sorted elements of the set at `v`; throws TypeError for non-sets.
  std::vector<Value> set_elements(const Value& v) const;

  /// Display form used by print: sets sorted canonically, 1-tuples inside
  /// sets unwrapped, strings unquoted at top level.
  std::string display(const Value& v) const;

  /// Every (object, rule set) pair currently maintained, with the set stored
  /// for each maintained derived predicate. For checking against from-scratch
  /// evaluation.
  struct MaintainedView {
    Address object;
    const CompiledRuleSet* ruleset;
    datalog::FactStore bases;    // current non-local base facts
    datalog::FactStore derived;  // stored derived facts
  };
  std::vector<MaintainedView> maintained_views() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

/// Display rendering of a value given its heap.
std::string display_value(const Heap& heap, const Value& v, bool top = true);

}  // namespace alda
