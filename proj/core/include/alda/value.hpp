#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace alda {

/// Opaque heap address. Equality is object identity; ordering is creation order.
struct Address {
  std::uint64_t id = 0;
  friend auto operator<=>(const Address&, const Address&) = default;
};

struct NoneValue {
  friend bool operator==(const NoneValue&, const NoneValue&) { return true; }
};

/// Runtime datum: None, Bool, Int, Str, immutable Tuple, or heap Address.
///
/// Values are cheap to copy; tuples share their component storage.
class Value {
 public:
  enum class Kind : std::uint8_t { None, Bool, Int, Str, Tuple, Addr };

  Value() = default;

  static Value none() { return Value(); }
  static Value boolean(bool b) { return Value(Rep(b)); }
  static Value integer(std::int64_t i) { return Value(Rep(i)); }
  static Value string(std::string s) { return Value(Rep(std::move(s))); }
  static Value tuple(std::vector<Value> elems);
  static Value address(Address a) { return Value(Rep(a)); }

  Kind kind() const { return static_cast<Kind>(rep_.index()); }
  bool is_none() const { return kind() == Kind::None; }
  bool is_bool() const { return kind() == Kind::Bool; }
  bool is_int() const { return kind() == Kind::Int; }
  bool is_str() const { return kind() == Kind::Str; }
  bool is_tuple() const { return kind() == Kind::Tuple; }
  bool is_addr() const { return kind() == Kind::Addr; }

  bool as_bool() const { return std::get<bool>(rep_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(rep_); }
  const std::string& as_str() const { return std::get<std::string>(rep_); }
  std::span<const Value> as_tuple() const;
  Address as_addr() const { return std::get<Address>(rep_); }

  std::size_t hash() const;

  /// Identity for addresses, component-wise for tuples, value equality otherwise.
  friend bool operator==(const Value& a, const Value& b);

 private:
  using TupleRep = std::shared_ptr<const std::vector<Value>>;
  using Rep = std::variant<NoneValue, bool, std::int64_t, std::string, TupleRep, Address>;

  explicit Value(Rep r) : rep_(std::move(r)) {}

  Rep rep_;
};

inline bool structural_equal(const Value& a, const Value& b) { return a == b; }

/// Total order used for display: None < Bool < Int < Str < Tuple < Addr;
/// ints numerically, strings lexicographically, tuples component-wise,
/// addresses by creation index.
std::strong_ordering canonical_compare(const Value& a, const Value& b);

struct CanonicalLess {
  bool operator()(const Value& a, const Value& b) const { return canonical_compare(a, b) < 0; }
};

struct ValueHash {
  std::size_t operator()(const Value& v) const { return v.hash(); }
};

/// Source-like rendering: 'str', (1, 2), (1,), None, True, @7 for addresses.
std::string to_string(const Value& v);

std::string kind_name(Value::Kind k);

}  // namespace alda

template <>
struct std::hash<alda::Value> {
  std::size_t operator()(const alda::Value& v) const { return v.hash(); }
};
