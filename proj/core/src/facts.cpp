#include "alda/facts.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace alda {

FactFileError::FactFileError(Kind kind, int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      kind_(kind),
      line_(line) {}

std::string kind_name(FactFileError::Kind k) {
  switch (k) {
    case FactFileError::Kind::Io: return "IoError";
    case FactFileError::Kind::Format: return "FormatError";
    case FactFileError::Kind::MixedPredicate: return "MixedPredicate";
  }
  return "?";
}

namespace {

class LineParser {
 public:
  LineParser(std::string_view s, int line) : s_(s), line_(line) {}

  void parse(std::string& pred, std::vector<Value>& args) {
    skip_ws();
    std::size_t start = i_;
    while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
    if (i_ == start || std::isdigit(static_cast<unsigned char>(s_[start]))) error("expected a predicate name");
    pred = std::string(s_.substr(start, i_ - start));
    skip_ws();
    if (peek() == '(') {
      ++i_;
      skip_ws();
      if (peek() != ')') {
        for (;;) {
          args.push_back(constant());
          skip_ws();
          if (peek() == ',') {
            ++i_;
            continue;
          }
          break;
        }
      }
      expect(')');
    }
    expect('.');
    skip_ws();
    if (i_ != s_.size() && s_[i_] != '%') error("unexpected text after the fact");
  }

 private:
  char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }
  void skip_ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  void expect(char c) {
    skip_ws();
    if (peek() != c) error(std::string("expected '") + c + "'");
    ++i_;
  }
  [[noreturn]] void error(const std::string& msg) const {
    throw FactFileError(FactFileError::Kind::Format, line_, msg);
  }

  Value constant() {
    skip_ws();
    char c = peek();
    if (c == '\'') {
      ++i_;
      std::string out;
      for (;;) {
        if (i_ >= s_.size()) error("unterminated string");
        char d = s_[i_++];
        if (d == '\'') break;
        if (d == '\\') {
          if (i_ >= s_.size()) error("unterminated string");
          char e = s_[i_++];
          out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
          continue;
        }
        out += d;
      }
      return Value::string(std::move(out));
    }
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(s_.data() + i_, s_.data() + s_.size(), v);
      if (ec != std::errc()) error("bad integer");
      i_ = static_cast<std::size_t>(p - s_.data());
      return Value::integer(v);
    }
    error("expected an integer or a quoted string");
  }

  std::string_view s_;
  int line_;
  std::size_t i_ = 0;
};

}  // namespace

FactFile parse_facts(std::string_view text) {
  FactFile out;
  std::unordered_set<Value, ValueHash> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '%') continue;
    std::string pred;
    std::vector<Value> args;
    LineParser(line, line_no).parse(pred, args);
    if (out.predicate.empty()) {
      out.predicate = pred;
    } else if (pred != out.predicate) {
      throw FactFileError(FactFileError::Kind::MixedPredicate, line_no,
                          "fact for " + pred + " in a file of " + out.predicate + " facts");
    }
    if (out.tuples.empty()) {
      out.arity = args.size();
    } else if (args.size() != out.arity) {
      throw FactFileError(FactFileError::Kind::Format, line_no, "inconsistent arity");
    }
    Value t = args.size() == 1 ? args[0] : Value::tuple(std::move(args));
    if (seen.insert(t).second) out.tuples.push_back(std::move(t));
  }
  return out;
}

FactFile load_fact_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FactFileError(FactFileError::Kind::Io, 0, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_facts(ss.str());
}

std::string format_facts(const std::string& predicate, const std::vector<Value>& tuples) {
  std::string out;
  for (const auto& t : tuples) {
    out += predicate + "(";
    std::vector<Value> one{t};
    std::span<const Value> xs = t.is_tuple() ? t.as_tuple() : std::span<const Value>(one);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) out += ",";
      out += to_string(xs[i]);
    }
    out += ").\n";
  }
  return out;
}

}  // namespace alda
