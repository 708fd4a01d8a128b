#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "alda/value.hpp"

namespace alda {

class FactFileError : public std::runtime_error {
 public:
  enum class Kind { Io, Format, MixedPredicate };
  FactFileError(Kind kind, int line, const std::string& message);

  Kind kind() const { return kind_; }
  int line() const { return line_; }  // 0 when not tied to a line

 private:
  Kind kind_;
  int line_;
};

std::string kind_name(FactFileError::Kind k);

struct FactFile {
  std::string predicate;      // empty for a file without facts
  std::size_t arity = 0;
  std::vector<Value> tuples;  // distinct, in file order; unary facts give plain values
};

/// One fact per line, `pred(c1, ..., cn).`, constants being integers or
/// single-quoted strings. Blank lines and lines starting with % are skipped.
/// Every fact must name the same predicate with the same arity. Unary facts
/// load as plain values, so `role('chair').` contributes 'chair'.
FactFile parse_facts(std::string_view text);
FactFile load_fact_file(const std::string& path);

/// Renders tuples back into the same format.
std::string format_facts(const std::string& predicate, const std::vector<Value>& tuples);

}  // namespace alda
