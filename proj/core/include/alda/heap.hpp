#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "alda/value.hpp"

namespace alda {

inline constexpr const char* kSetClass = "set";
inline constexpr const char* kSequenceClass = "sequence";

/// Instance of a user-defined class: a partial map from field names to values.
struct RecordObj {
  std::map<std::string, Value> fields;
  friend bool operator==(const RecordObj&, const RecordObj&) = default;
};

/// Finite set of values. Iteration order is insertion order (with swap-removal
/// on erase), which makes every run deterministic. The version counter bumps on
/// every content change.
class SetObj {
 public:
  SetObj() = default;

  bool insert(const Value& v);
  bool erase(const Value& v);
  bool contains(const Value& v) const { return index_.contains(v); }
  std::size_t size() const { return elems_.size(); }
  bool empty() const { return elems_.empty(); }
  const std::vector<Value>& elements() const { return elems_; }
  std::uint64_t version() const { return version_; }

  /// Replace the contents; bumps the version only when the contents differ.
  /// Returns true when something changed.
  bool assign(const std::vector<Value>& elems);

  /// Same contents, regardless of order.
  bool same_contents(const SetObj& other) const;

 private:
  std::vector<Value> elems_;
  std::unordered_map<Value, std::size_t, ValueHash> index_;
  std::uint64_t version_ = 0;
};

struct SeqObj {
  std::vector<Value> elems;
  friend bool operator==(const SeqObj&, const SeqObj&) = default;
};

using HeapObject = std::variant<RecordObj, SetObj, SeqObj>;

/// The single mutable store: address -> object, plus the heap type map
/// (address -> class name) and the registry of fields holding derived predicates.
///
/// dom(objects) = dom(types) always holds: both live in one entry per address.
/// Addresses are never reclaimed.
class Heap {
 public:
  Address allocate(std::string class_name, HeapObject object);
  Address allocate_set() { return allocate(kSetClass, SetObj{}); }

  bool contains(Address a) const { return a.id >= 1 && a.id <= entries_.size(); }
  std::size_t size() const { return entries_.size(); }

  const std::string& type_of(Address a) const { return entry(a).type; }
  const HeapObject& object(Address a) const { return entry(a).object; }
  HeapObject& object(Address a) { return entry(a).object; }

  bool is_set(Address a) const { return contains(a) && std::holds_alternative<SetObj>(object(a)); }
  bool is_record(Address a) const {
    return contains(a) && std::holds_alternative<RecordObj>(object(a));
  }
  const SetObj& set(Address a) const { return std::get<SetObj>(object(a)); }
  SetObj& set(Address a) { return std::get<SetObj>(object(a)); }
  const RecordObj& record(Address a) const { return std::get<RecordObj>(object(a)); }
  RecordObj& record(Address a) { return std::get<RecordObj>(object(a)); }

  /// Designate a.f as storage of a non-local derived predicate.
  void register_derived_field(Address a, const std::string& field);
  bool is_derived_field(Address a, const std::string& field) const;
  std::size_t derived_field_count() const { return derived_fields_.size(); }

  /// Sets that currently back a derived predicate; mutating them is illegal.
  void mark_derived_storage(Address set) { derived_storage_.insert(set.id); }
  bool is_derived_storage(Address set) const { return derived_storage_.contains(set.id); }

 private:
  struct Entry {
    HeapObject object;
    std::string type;
  };
  Entry& entry(Address a) { return entries_.at(a.id - 1); }
  const Entry& entry(Address a) const { return entries_.at(a.id - 1); }

  std::vector<Entry> entries_;
  std::unordered_set<std::string> derived_fields_;
  std::unordered_set<std::uint64_t> derived_storage_;
};

/// Follows a non-empty chain of fields from `start`. Returns nullopt (bottom)
/// when a step leaves the heap, hits a non-record, or names an absent field.
std::optional<Value> deref(const Heap& heap, Address start, std::span<const std::string> fields);

/// Canonical rendering of everything reachable from `root`, with addresses
/// renumbered by first visit. Two heaps are equal up to fresh-address renaming
/// when their canonical dumps match. Fields for which `skip_field` returns true
/// are omitted.
std::string canonical_dump(const Heap& heap, Address root,
                           const std::function<bool(const std::string&)>& skip_field = {});

}  // namespace alda
