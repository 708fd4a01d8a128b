#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "alda/ast.hpp"

namespace alda::datalog {

/// Predicate key -> distinct tuples (each a tuple Value of the predicate's
/// arity). Duplicates in inputs are collapsed.
using FactStore = std::map<std::string, std::vector<Value>>;

enum class Strategy { SemiNaive, Naive };

struct EvalStats {
  std::size_t rounds = 0;       // fixpoint iterations over all strata
  std::size_t derivations = 0;  // conclusion instances produced, with duplicates
};

/// A rule set prepared for repeated evaluation: stratified, with join plans
/// built once. Construction throws RuntimeError(StratificationError).
class RuleProgram {
 public:
  explicit RuleProgram(std::vector<ast::Rule> rules);
  ~RuleProgram();
  RuleProgram(RuleProgram&&) noexcept;
  RuleProgram& operator=(RuleProgram&&) noexcept;

  /// Least model, stratum by stratum. The result holds every derived
  /// predicate plus the input relations unchanged; base predicates missing
  /// from the input are empty. Throws RuntimeError(ArityError) on input tuples
  /// of the wrong shape.
  FactStore evaluate(const FactStore& input, Strategy strategy = Strategy::SemiNaive,
                     EvalStats* stats = nullptr) const;

  const std::vector<std::set<std::string>>& strata() const;
  const std::map<std::string, std::size_t>& arities() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

FactStore eval_rules(const std::vector<ast::Rule>& rules, const FactStore& input,
                     Strategy strategy = Strategy::SemiNaive);

/// One stratum on its own: `rules` may only negate predicates already
/// complete in `established`.
FactStore eval_stratum_seminaive(const std::vector<ast::Rule>& rules, const FactStore& established);
FactStore eval_stratum_naive(const std::vector<ast::Rule>& rules, const FactStore& established);

/// Query argument after bound variables have been replaced by their values.
struct QueryArg {
  struct Const {
    Value value;
  };
  struct Var {
    std::string name;
  };
  struct Wildcard {};
  std::variant<Const, Var, Wildcard> node;
};

struct QueryPattern {
  std::string predicate;
  std::vector<QueryArg> args;
};

/// Matching tuples projected onto the distinct variables in order of first
/// occurrence. Each wildcard is a variable of its own, so `p(_, _)` returns
/// all of p. With no variables the answer is {()} when anything matches.
/// Throws RuntimeError(UndefinedPredicate) if `facts` lacks the predicate and
/// RuntimeError(ArityError) on an arity mismatch.
std::vector<Value> answer_query(const QueryPattern& q, const FactStore& facts);

}  // namespace alda::datalog
