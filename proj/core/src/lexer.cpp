#include "lexer.hpp"

#include <array>
#include <cctype>

namespace alda::detail {

namespace {

constexpr std::array kKeywords = {
    "rules", "if",  "else", "elif", "for", "while", "some", "each", "ifSome", "whileSome",
    "infer", "new", "extends", "class", "def", "defun", "return", "skip", "in", "not",
    "and",   "or",  "is",   "count", "max", "min", "sum", "self", "True", "False", "None",
};

// Longest first so that ":=" wins over ":".
constexpr std::array kOperators = {":=", "==", "!=", "<=", ">=", "(", ")", "[", "]", "{", "}",
                                   ",",  ".",  ":",  "|",  "=",  "<", ">", "+", "-", "*", "/",
                                   "%"};

[[noreturn]] void fail(SourceLoc loc, const std::string& msg) {
  throw CompileError(Diagnostic::Stage::Syntax, "syntax", msg, loc);
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : src_(text) {}

  std::vector<Token> run() {
    indents_.push_back(0);
    while (pos_ < src_.size()) {
      if (at_line_start_ && depth_ == 0) {
        if (!handle_indentation()) continue;
      }
      char c = src_[pos_];
      if (c == '\n') {
        newline();
        continue;
      }
      if (c == '\r') {
        ++pos_;
        continue;
      }
      if (c == ' ') {
        advance();
        continue;
      }
      if (c == '\t') fail(here(), "tab characters are not allowed");
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      lex_token();
    }
    if (line_has_tokens_) push(TokKind::Newline, "", here());
    while (indents_.size() > 1) {
      indents_.pop_back();
      push(TokKind::Dedent, "", here());
    }
    push(TokKind::End, "", here());
    return std::move(out_);
  }

 private:
  SourceLoc here() const { return SourceLoc{line_, col_}; }

  void advance() {
    ++pos_;
    ++col_;
  }

  void newline() {
    SourceLoc end = here();
    ++pos_;
    ++line_;
    col_ = 1;
    if (depth_ == 0) {
      if (line_has_tokens_) push(TokKind::Newline, "", end);
      line_has_tokens_ = false;
      at_line_start_ = true;
    }
  }

  // Measures leading spaces of a logical line and emits INDENT/DEDENT.
  // Returns false when the line is blank or a comment (already consumed).
  bool handle_indentation() {
    int width = 0;
    std::size_t p = pos_;
    while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t' || src_[p] == '\r')) {
      if (src_[p] == '\t') fail(SourceLoc{line_, width + 1}, "tab characters are not allowed");
      if (src_[p] == ' ') ++width;
      ++p;
    }
    if (p >= src_.size() || src_[p] == '\n' || src_[p] == '#') {
      while (p < src_.size() && src_[p] != '\n') ++p;
      pos_ = p;
      col_ = 1;
      if (pos_ < src_.size()) {
        ++pos_;
        ++line_;
      }
      return false;
    }
    pos_ = p;
    col_ = width + 1;
    at_line_start_ = false;
    if (width > indents_.back()) {
      indents_.push_back(width);
      push(TokKind::Indent, "", here());
    } else {
      while (width < indents_.back()) {
        indents_.pop_back();
        push(TokKind::Dedent, "", here());
      }
      if (width != indents_.back()) fail(here(), "inconsistent dedent");
    }
    return true;
  }

  void push(TokKind kind, std::string text, SourceLoc loc, std::uint64_t number = 0) {
    if (kind != TokKind::Newline && kind != TokKind::Indent && kind != TokKind::Dedent &&
        kind != TokKind::End) {
      line_has_tokens_ = true;
    }
    out_.push_back(Token{kind, std::move(text), number, loc});
  }

  void lex_token() {
    SourceLoc loc = here();
    char c = src_[pos_];
    if (ident_start(c)) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && ident_char(src_[pos_])) advance();
      std::string word(src_.substr(start, pos_ - start));
      TokKind kind = is_keyword(word) ? TokKind::Keyword : TokKind::Name;
      push(kind, std::move(word), loc);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::uint64_t n = 0;
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        std::uint64_t d = static_cast<std::uint64_t>(src_[pos_] - '0');
        if (n > (UINT64_MAX - d) / 10) fail(loc, "integer literal too large");
        n = n * 10 + d;
        advance();
      }
      if (pos_ < src_.size() && ident_char(src_[pos_])) fail(loc, "malformed number");
      if (n > static_cast<std::uint64_t>(INT64_MAX) + 1) fail(loc, "integer literal too large");
      push(TokKind::Int, std::string(src_.substr(start, pos_ - start)), loc, n);
      return;
    }
    if (c == '\'' || c == '"') {
      lex_string(c, loc);
      return;
    }
    for (std::string_view op : kOperators) {
      if (src_.substr(pos_, op.size()) == op) {
        for (std::size_t i = 0; i < op.size(); ++i) advance();
        if (op == "(" || op == "[" || op == "{") ++depth_;
        if ((op == ")" || op == "]" || op == "}") && depth_ > 0) --depth_;
        push(TokKind::Op, std::string(op), loc);
        return;
      }
    }
    fail(loc, std::string("unexpected character '") + c + "'");
  }

  void lex_string(char quote, SourceLoc loc) {
    advance();
    std::string s;
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') fail(loc, "unterminated string");
      char c = src_[pos_];
      if (c == quote) {
        advance();
        break;
      }
      if (c == '\\') {
        advance();
        if (pos_ >= src_.size()) fail(loc, "unterminated string");
        char e = src_[pos_];
        switch (e) {
          case 'n': s += '\n'; break;
          case 't': s += '\t'; break;
          case '\\': s += '\\'; break;
          case '\'': s += '\''; break;
          case '"': s += '"'; break;
          default: fail(here(), std::string("unknown escape \\") + e);
        }
        advance();
        continue;
      }
      s += c;
      advance();
    }
    push(TokKind::Str, std::move(s), loc);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  int depth_ = 0;
  bool at_line_start_ = true;
  bool line_has_tokens_ = false;
  std::vector<int> indents_;
  std::vector<Token> out_;
};

}  // namespace

bool is_keyword(std::string_view word) {
  for (std::string_view k : kKeywords) {
    if (k == word) return true;
  }
  return false;
}

std::vector<Token> tokenize(std::string_view text) { return Lexer(text).run(); }

}  // namespace alda::detail
