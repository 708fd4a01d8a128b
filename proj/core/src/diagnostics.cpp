#include "alda/diagnostics.hpp"

#include <sstream>

namespace alda {

std::string format_loc(const SourceLoc& loc) {
  if (loc.line <= 0) return "<unknown>";
  return std::to_string(loc.line) + ":" + std::to_string(loc.column);
}

std::string stage_name(Diagnostic::Stage s) {
  switch (s) {
    case Diagnostic::Stage::Syntax: return "syntax";
    case Diagnostic::Stage::WellFormed: return "well-formedness";
    case Diagnostic::Stage::Lowering: return "lowering";
    case Diagnostic::Stage::Analysis: return "analysis";
  }
  return "?";
}

std::string Diagnostic::to_string() const {
  std::ostringstream out;
  out << format_loc(loc) << ": " << stage_name(stage) << " error [" << code << "]: " << message;
  return out.str();
}

namespace {
std::string join(const std::vector<Diagnostic>& diags) {
  std::string s;
  for (const auto& d : diags) {
    if (!s.empty()) s += '\n';
    s += d.to_string();
  }
  return s;
}
}  // namespace

CompileError::CompileError(std::vector<Diagnostic> diags)
    : std::runtime_error(join(diags)), diags_(std::move(diags)) {}

CompileError::CompileError(Diagnostic::Stage stage, std::string code, std::string message,
                           SourceLoc loc)
    : CompileError(std::vector<Diagnostic>{
          Diagnostic{stage, std::move(code), std::move(message), loc}}) {}

std::string kind_name(RuntimeErrorKind k) {
  switch (k) {
    case RuntimeErrorKind::FieldUndefined: return "FieldUndefined";
    case RuntimeErrorKind::NotATuple: return "NotATuple";
    case RuntimeErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case RuntimeErrorKind::TypeError: return "TypeError";
    case RuntimeErrorKind::EmptyAggregate: return "EmptyAggregate";
    case RuntimeErrorKind::MethodUndefined: return "MethodUndefined";
    case RuntimeErrorKind::ArityMismatch: return "ArityMismatch";
    case RuntimeErrorKind::DerivedWrite: return "DerivedWrite";
    case RuntimeErrorKind::BaseNotASet: return "BaseNotASet";
    case RuntimeErrorKind::UnknownClass: return "UnknownClass";
    case RuntimeErrorKind::UnknownRuleSet: return "UnknownRuleSet";
    case RuntimeErrorKind::NotABasePredicate: return "NotABasePredicate";
    case RuntimeErrorKind::UndefinedPredicate: return "UndefinedPredicate";
    case RuntimeErrorKind::UnboundVariable: return "UnboundVariable";
    case RuntimeErrorKind::IntegerOverflow: return "IntegerOverflow";
    case RuntimeErrorKind::DivisionByZero: return "DivisionByZero";
    case RuntimeErrorKind::StratificationError: return "StratificationError";
    case RuntimeErrorKind::ArityError: return "ArityError";
    case RuntimeErrorKind::IoError: return "IoError";
  }
  return "RuntimeError";
}

namespace {
std::string runtime_what(RuntimeErrorKind kind, const std::string& msg, const SourceLoc& loc) {
  return format_loc(loc) + ": runtime error [" + kind_name(kind) + "]: " + msg;
}
}  // namespace

RuntimeError::RuntimeError(RuntimeErrorKind kind, std::string message, SourceLoc loc)
    : std::runtime_error(runtime_what(kind, message, loc)),
      kind_(kind),
      detail_(std::move(message)),
      loc_(loc) {}

RuntimeError RuntimeError::with_loc(SourceLoc loc) const {
  if (loc_.line > 0) return *this;
  return RuntimeError(kind_, detail_, loc);
}

}  // namespace alda
