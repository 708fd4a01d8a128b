#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace alda {

struct SourceLoc {
  int line = 0;
  int column = 0;
  // Locations never participate in AST equality.
  friend bool operator==(const SourceLoc&, const SourceLoc&) { return true; }
};

std::string format_loc(const SourceLoc& loc);

/// One compile-stage finding: syntax, well-formedness, lowering, or analysis.
struct Diagnostic {
  enum class Stage { Syntax, WellFormed, Lowering, Analysis };
  Stage stage = Stage::Syntax;
  std::string code;  // e.g. "syntax", "unsafe-rule", "derived-write"
  std::string message;
  SourceLoc loc;

  std::string to_string() const;
};

std::string stage_name(Diagnostic::Stage s);

/// Thrown by the parser, lowering, and analyses. Carries every diagnostic found
/// before the stage gave up (the parser stops at the first one).
class CompileError : public std::runtime_error {
 public:
  explicit CompileError(std::vector<Diagnostic> diags);
  CompileError(Diagnostic::Stage stage, std::string code, std::string message, SourceLoc loc);

  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

enum class RuntimeErrorKind {
  FieldUndefined,
  NotATuple,
  IndexOutOfRange,
  TypeError,
  EmptyAggregate,
  MethodUndefined,
  ArityMismatch,
  DerivedWrite,
  BaseNotASet,
  UnknownClass,
  UnknownRuleSet,
  NotABasePredicate,
  UndefinedPredicate,
  UnboundVariable,
  IntegerOverflow,
  DivisionByZero,
  StratificationError,
  ArityError,
  IoError,
};

std::string kind_name(RuntimeErrorKind k);

/// A stuck state of the operational semantics, reified.
class RuntimeError : public std::runtime_error {
 public:
  RuntimeError(RuntimeErrorKind kind, std::string message, SourceLoc loc = {});

  RuntimeErrorKind kind() const { return kind_; }
  const SourceLoc& loc() const { return loc_; }
  const std::string& detail() const { return detail_; }

  // Attach a location if none was known where the error was raised.
  RuntimeError with_loc(SourceLoc loc) const;

 private:
  RuntimeErrorKind kind_;
  std::string detail_;
  SourceLoc loc_;
};

}  // namespace alda
