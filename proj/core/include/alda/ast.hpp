#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "alda/box.hpp"
#include "alda/diagnostics.hpp"
#include "alda/value.hpp"

// Abstract syntax shared by the surface language and the lowered kernel.
// The kernel is the subset that the lowering passes leave behind.
namespace alda::ast {

// ---------------------------------------------------------------------------
// Rules

/// Scoping of a predicate inside a rule set.
///   Global: path = {x, f1, ...}   global variable x, then field chain
///   Self:   path = {f1, ...}      self.f1...
///   Local:  path = {x}            variable local to the rule set
///   Unresolved: as written in source; "self" may lead the path
struct PredicateRef {
  enum class Scope : std::uint8_t { Unresolved, Global, Self, Local };
  Scope scope = Scope::Unresolved;
  std::vector<std::string> path;

  /// Unique name within one rule set, also the source spelling.
  std::string key() const;
  bool is_chain() const { return path.size() > 1 || scope == Scope::Self; }
  friend bool operator==(const PredicateRef&, const PredicateRef&) = default;
};

struct LogicVar {
  std::string name;
  friend bool operator==(const LogicVar&, const LogicVar&) = default;
};
struct AnyArg {
  friend bool operator==(const AnyArg&, const AnyArg&) = default;
};
using RuleTerm = std::variant<LogicVar, Value, AnyArg>;

struct Atom {
  PredicateRef pred;
  std::vector<RuleTerm> args;
  SourceLoc loc;
  friend bool operator==(const Atom&, const Atom&) = default;
};

struct RuleLiteral {
  Atom atom;
  bool negated = false;
  friend bool operator==(const RuleLiteral&, const RuleLiteral&) = default;
};

/// conclusion if hypothesis, ...   (facts have no hypotheses)
struct Rule {
  Atom conclusion;
  std::vector<RuleLiteral> hypotheses;
  SourceLoc loc;
  friend bool operator==(const Rule&, const Rule&) = default;
};

struct RuleSetDef {
  std::string name;
  std::vector<Rule> rules;
  SourceLoc loc;
  friend bool operator==(const RuleSetDef&, const RuleSetDef&) = default;
};

// ---------------------------------------------------------------------------
// Expressions

struct Expr;
struct Pattern;
struct Stmt;
using Block = std::vector<Stmt>;

enum class VarKind : std::uint8_t {
  Unresolved,  // plain identifier from the parser
  Param,       // method parameter, immutable
  Local,       // method or top-level temporary
  Bound,       // introduced by a for/some/each/comprehension binder
};

enum class UnaryOp : std::uint8_t { Not, Neg, IsTuple, Len };

enum class BinaryOp : std::uint8_t {
  Or, And,
  Is, IsNot, Lt, Le, Gt, Ge, In, NotIn,
  Add, Sub, Mul, Div, Mod,
  Select,
};

enum class Quantifier : std::uint8_t { Some, Each };
enum class AggregateOp : std::uint8_t { Count, Max, Min, Sum };

enum class CallKind : std::uint8_t {
  Implicit,  // bare f(...): resolved to a self method or a builtin
  Method,    // target.f(...)
  Super,     // super().f(...)
  Builtin,   // print, load_facts
};

struct Iterator {
  Box<Pattern> pattern;
  Box<Expr> domain;
  friend bool operator==(const Iterator&, const Iterator&) = default;
};

struct QueryArg {
  struct Const {
    Value value;
    friend bool operator==(const Const&, const Const&) = default;
  };
  struct BoundVar {  // =v
    Box<Expr> var;
    friend bool operator==(const BoundVar&, const BoundVar&) = default;
  };
  struct FreeVar {
    std::string name;
    friend bool operator==(const FreeVar&, const FreeVar&) = default;
  };
  struct Wildcard {
    friend bool operator==(const Wildcard&, const Wildcard&) = default;
  };
  std::variant<Const, BoundVar, FreeVar, Wildcard> node;
  friend bool operator==(const QueryArg&, const QueryArg&) = default;
};

/// p  or  p(arg, ...). A missing argument list abbreviates all wildcards.
struct Query {
  std::string predicate;
  std::optional<std::vector<QueryArg>> args;
  SourceLoc loc;
  friend bool operator==(const Query&, const Query&) = default;
};

struct KwArg {
  std::string name;
  Box<Expr> value;
  friend bool operator==(const KwArg&, const KwArg&) = default;
};

/// [target.]infer(queries..., kwargs..., rules=ruleset)
struct InferCall {
  std::optional<Box<Expr>> target;
  std::vector<Query> queries;
  std::vector<KwArg> kwargs;
  std::string ruleset;
  friend bool operator==(const InferCall&, const InferCall&) = default;
};

namespace ex {
struct Literal {
  Value value;
  friend bool operator==(const Literal&, const Literal&) = default;
};
struct Var {
  std::string name;
  VarKind kind = VarKind::Unresolved;
  friend bool operator==(const Var&, const Var&) = default;
};
struct SelfRef {
  friend bool operator==(const SelfRef&, const SelfRef&) = default;
};
/// The object holding global variables after lowering.
struct GlobalsRef {
  friend bool operator==(const GlobalsRef&, const GlobalsRef&) = default;
};
struct Field {
  Box<Expr> object;
  std::string name;
  friend bool operator==(const Field&, const Field&) = default;
};
struct Tuple {
  std::vector<Expr> elems;
  friend bool operator==(const Tuple&, const Tuple&) = default;
};
struct Unary {
  UnaryOp op;
  Box<Expr> operand;
  friend bool operator==(const Unary&, const Unary&) = default;
};
struct Binary {
  BinaryOp op;
  Box<Expr> lhs;
  Box<Expr> rhs;
  friend bool operator==(const Binary&, const Binary&) = default;
};
struct IsInstance {
  Box<Expr> operand;
  std::string class_name;
  friend bool operator==(const IsInstance&, const IsInstance&) = default;
};
struct Quant {
  Quantifier quantifier;
  std::vector<Iterator> iters;
  Box<Expr> cond;
  friend bool operator==(const Quant&, const Quant&) = default;
};
struct Aggregate {
  AggregateOp op;
  Box<Expr> operand;
  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};
struct Call {
  CallKind kind = CallKind::Implicit;
  std::optional<Box<Expr>> target;
  std::string method;
  std::vector<Expr> args;
  friend bool operator==(const Call&, const Call&) = default;
};
struct SetLit {
  std::vector<Expr> elems;
  friend bool operator==(const SetLit&, const SetLit&) = default;
};
struct Comprehension {
  Box<Expr> elem;
  std::vector<Iterator> iters;
  std::optional<Box<Expr>> cond;
  friend bool operator==(const Comprehension&, const Comprehension&) = default;
};
struct Infer {
  InferCall call;
  friend bool operator==(const Infer&, const Infer&) = default;
};
/// new C   or   new(C, [args]) which also runs setup(args)
struct New {
  std::string class_name;
  std::optional<std::vector<Expr>> setup_args;
  friend bool operator==(const New&, const New&) = default;
};
}  // namespace ex

struct Expr {
  using Node = std::variant<ex::Literal, ex::Var, ex::SelfRef, ex::GlobalsRef, ex::Field, ex::Tuple,
                            ex::Unary, ex::Binary, ex::IsInstance, ex::Quant, ex::Aggregate,
                            ex::Call, ex::SetLit, ex::Comprehension, ex::Infer, ex::New>;
  Node node;
  SourceLoc loc;

  template <class T>
  bool is() const { return std::holds_alternative<T>(node); }
  template <class T>
  const T& as() const { return std::get<T>(node); }
  template <class T>
  T& as() { return std::get<T>(node); }

  friend bool operator==(const Expr&, const Expr&) = default;
};

// ---------------------------------------------------------------------------
// Patterns

namespace pat {
/// A variable that receives a component.
struct Var {
  Box<Expr> var;
  friend bool operator==(const Var&, const Var&) = default;
};
/// =x : the component must equal the current value of x.
struct Bound {
  Box<Expr> var;
  friend bool operator==(const Bound&, const Bound&) = default;
};
struct Wildcard {
  friend bool operator==(const Wildcard&, const Wildcard&) = default;
};
struct Tuple {
  std::vector<Pattern> elems;
  friend bool operator==(const Tuple&, const Tuple&) = default;
};
/// Non-variable expression; the component must equal its value.
struct Const {
  Box<Expr> expr;
  friend bool operator==(const Const&, const Const&) = default;
};
}  // namespace pat

struct Pattern {
  using Node = std::variant<pat::Var, pat::Bound, pat::Wildcard, pat::Tuple, pat::Const>;
  Node node;
  SourceLoc loc;

  template <class T>
  bool is() const { return std::holds_alternative<T>(node); }
  template <class T>
  const T& as() const { return std::get<T>(node); }
  template <class T>
  T& as() { return std::get<T>(node); }

  friend bool operator==(const Pattern&, const Pattern&) = default;
};

// ---------------------------------------------------------------------------
// Statements

namespace st {
struct Skip {
  friend bool operator==(const Skip&, const Skip&) = default;
};
/// target := value. Surface targets may be tuples of targets.
struct Assign {
  Expr target;
  Expr value;
  friend bool operator==(const Assign&, const Assign&) = default;
};
/// target := new C
struct NewObj {
  Expr target;
  std::string class_name;
  friend bool operator==(const NewObj&, const NewObj&) = default;
};
/// t1, ..., tn := [e.]infer(...)
struct Infer {
  std::vector<Expr> targets;
  InferCall call;
  friend bool operator==(const Infer&, const Infer&) = default;
};
struct If {
  Expr cond;
  Block then_body;
  std::optional<Block> else_body;
  friend bool operator==(const If&, const If&) = default;
};
struct For {
  Pattern pattern;
  Expr domain;
  Block body;
  friend bool operator==(const For&, const For&) = default;
};
struct While {
  Expr cond;
  Block body;
  friend bool operator==(const While&, const While&) = default;
};
struct IfSome {
  std::vector<Iterator> iters;
  Expr cond;
  Block body;
  friend bool operator==(const IfSome&, const IfSome&) = default;
};
struct WhileSome {
  std::vector<Iterator> iters;
  Expr cond;
  Block body;
  friend bool operator==(const WhileSome&, const WhileSome&) = default;
};
struct ExprStmt {
  Expr expr;
  friend bool operator==(const ExprStmt&, const ExprStmt&) = default;
};
struct Return {
  std::optional<Expr> value;
  friend bool operator==(const Return&, const Return&) = default;
};
}  // namespace st

struct Stmt {
  using Node = std::variant<st::Skip, st::Assign, st::NewObj, st::Infer, st::If, st::For, st::While,
                            st::IfSome, st::WhileSome, st::ExprStmt, st::Return>;
  Node node;
  SourceLoc loc;

  template <class T>
  bool is() const { return std::holds_alternative<T>(node); }
  template <class T>
  const T& as() const { return std::get<T>(node); }
  template <class T>
  T& as() { return std::get<T>(node); }

  friend bool operator==(const Stmt&, const Stmt&) = default;
};

// ---------------------------------------------------------------------------
// Program

enum class MethodKind : std::uint8_t { Def, Defun };

struct Method {
  MethodKind kind = MethodKind::Def;
  std::string name;
  std::vector<std::string> params;
  Block body;
  SourceLoc loc;
  friend bool operator==(const Method&, const Method&) = default;
};

struct ClassDef {
  std::string name;
  std::optional<std::string> base;
  std::vector<RuleSetDef> rulesets;
  std::vector<Method> methods;
  SourceLoc loc;
  friend bool operator==(const ClassDef&, const ClassDef&) = default;
};

struct Program {
  std::vector<RuleSetDef> rulesets;
  std::vector<ClassDef> classes;
  Block top;
  friend bool operator==(const Program&, const Program&) = default;
};

/// Name of the synthesized class holding global variables and global rule sets.
inline constexpr const char* kGlobalsClass = "$Globals";

// ---------------------------------------------------------------------------
// Builders

template <class N>
Expr mk(N node, SourceLoc loc = {}) {
  return Expr{Expr::Node(std::move(node)), loc};
}
template <class N>
Stmt mk_stmt(N node, SourceLoc loc = {}) {
  return Stmt{Stmt::Node(std::move(node)), loc};
}
template <class N>
Pattern mk_pat(N node, SourceLoc loc = {}) {
  return Pattern{Pattern::Node(std::move(node)), loc};
}

Expr lit(Value v, SourceLoc loc = {});
Expr var(std::string name, VarKind kind, SourceLoc loc = {});
Expr field(Expr object, std::string name, SourceLoc loc = {});
Expr global(std::string name, SourceLoc loc = {});
Expr unary(UnaryOp op, Expr e, SourceLoc loc = {});
Expr binary(BinaryOp op, Expr l, Expr r, SourceLoc loc = {});
/// Kernel conjunction: not(not(a) or not(b)).
Expr kernel_and(Expr a, Expr b);
Expr kernel_not(Expr e);

}  // namespace alda::ast
