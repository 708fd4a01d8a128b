#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "alda/diagnostics.hpp"

namespace alda::detail {

enum class TokKind { Name, Keyword, Int, Str, Op, Newline, Indent, Dedent, End };

struct Token {
  TokKind kind;
  std::string text;         // identifier, keyword, operator, or decoded string
  std::uint64_t number = 0;  // magnitude for Int tokens
  SourceLoc loc;
};

bool is_keyword(std::string_view word);

/// Splits source into tokens with Python-style INDENT/DEDENT. Newlines and
/// indentation inside brackets are ignored.
std::vector<Token> tokenize(std::string_view text);

}  // namespace alda::detail
