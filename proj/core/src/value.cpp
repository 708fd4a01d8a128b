#include "alda/value.hpp"

#include <sstream>

namespace alda {

namespace {

std::size_t mix(std::size_t seed, std::size_t h) {
  return seed ^ (h + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

void quote(std::ostringstream& out, const std::string& s) {
  out << '\'';
  for (char c : s) {
    switch (c) {
      case '\'': out << "\\'"; break;
      case '\\': out << "\\\\"; break;
      case '\n': out << "\\n"; break;
      case '\t': out << "\\t"; break;
      default: out << c;
    }
  }
  out << '\'';
}

void render(std::ostringstream& out, const Value& v) {
  switch (v.kind()) {
    case Value::Kind::None: out << "None"; break;
    case Value::Kind::Bool: out << (v.as_bool() ? "True" : "False"); break;
    case Value::Kind::Int: out << v.as_int(); break;
    case Value::Kind::Str: quote(out, v.as_str()); break;
    case Value::Kind::Addr: out << '@' << v.as_addr().id; break;
    case Value::Kind::Tuple: {
      auto elems = v.as_tuple();
      out << '(';
      for (std::size_t i = 0; i < elems.size(); ++i) {
        if (i) out << ", ";
        render(out, elems[i]);
      }
      if (elems.size() == 1) out << ',';
      out << ')';
      break;
    }
  }
}

}  // namespace

Value Value::tuple(std::vector<Value> elems) {
  return Value(Rep(std::make_shared<const std::vector<Value>>(std::move(elems))));
}

std::span<const Value> Value::as_tuple() const {
  const auto& rep = std::get<TupleRep>(rep_);
  return {rep->data(), rep->size()};
}

std::size_t Value::hash() const {
  std::size_t seed = rep_.index();
  switch (kind()) {
    case Kind::None: return mix(seed, 0);
    case Kind::Bool: return mix(seed, as_bool() ? 1 : 2);
    case Kind::Int: return mix(seed, std::hash<std::int64_t>{}(as_int()));
    case Kind::Str: return mix(seed, std::hash<std::string>{}(as_str()));
    case Kind::Addr: return mix(seed, std::hash<std::uint64_t>{}(as_addr().id));
    case Kind::Tuple:
      for (const auto& e : as_tuple()) seed = mix(seed, e.hash());
      return mix(seed, as_tuple().size());
  }
  return seed;
}

bool operator==(const Value& a, const Value& b) {
  if (a.rep_.index() != b.rep_.index()) return false;
  if (a.is_tuple()) {
    const auto& ra = std::get<Value::TupleRep>(a.rep_);
    const auto& rb = std::get<Value::TupleRep>(b.rep_);
    return ra == rb || *ra == *rb;
  }
  return a.rep_ == b.rep_;
}

std::strong_ordering canonical_compare(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) return a.kind() <=> b.kind();
  switch (a.kind()) {
    case Value::Kind::None: return std::strong_ordering::equal;
    case Value::Kind::Bool: return a.as_bool() <=> b.as_bool();
    case Value::Kind::Int: return a.as_int() <=> b.as_int();
    case Value::Kind::Str: return a.as_str().compare(b.as_str()) <=> 0;
    case Value::Kind::Addr: return a.as_addr() <=> b.as_addr();
    case Value::Kind::Tuple: {
      auto ta = a.as_tuple();
      auto tb = b.as_tuple();
      for (std::size_t i = 0; i < ta.size() && i < tb.size(); ++i) {
        if (auto c = canonical_compare(ta[i], tb[i]); c != 0) return c;
      }
      return ta.size() <=> tb.size();
    }
  }
  return std::strong_ordering::equal;
}

std::string to_string(const Value& v) {
  std::ostringstream out;
  render(out, v);
  return out.str();
}

std::string kind_name(Value::Kind k) {
  switch (k) {
    case Value::Kind::None: return "None";
    case Value::Kind::Bool: return "bool";
    case Value::Kind::Int: return "int";
    case Value::Kind::Str: return "str";
    case Value::Kind::Tuple: return "tuple";
    case Value::Kind::Addr: return "object";
  }
  return "?";
}

}  // namespace alda
