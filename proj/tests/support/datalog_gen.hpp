#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "alda/ast.hpp"
#include "alda/datalog.hpp"

namespace alda::testing {

struct DatalogGenParams {
  int max_preds = 5;
  int max_rules = 8;
  int max_arity = 3;
  int max_domain = 10;
  bool negation = false;
  int max_facts_per_pred = 20;
};

/// A random safe rule set over predicates p0..pk with integer constants
/// 0..domain-1. Each derived predicate has a level; positive hypotheses use
/// predicates of level <= the head's, negated ones strictly lower levels, so
/// every instance is stratifiable. Base predicates have level 0.
struct DatalogInstance {
  std::vector<ast::Rule> rules;
  datalog::FactStore facts;
  std::map<std::string, int> arity;
  std::map<std::string, int> level;
  int domain = 0;

  std::vector<std::string> derived() const;
  std::string to_text() const;
};

DatalogInstance random_instance(std::mt19937_64& rng, const DatalogGenParams& p);

ast::Atom atom(const std::string& pred, std::vector<ast::RuleTerm> args);

/// Sorts every relation canonically so stores compare with ==.
datalog::FactStore normalized(datalog::FactStore s);

}  // namespace alda::testing
