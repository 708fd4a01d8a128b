#include "alda/heap.hpp"

#include <algorithm>
#include <sstream>

namespace alda {

bool SetObj::insert(const Value& v) {
  auto [it, inserted] = index_.try_emplace(v, elems_.size());
  if (!inserted) return false;
  elems_.push_back(v);
  ++version_;
  return true;
}

bool SetObj::erase(const Value& v) {
  auto it = index_.find(v);
  if (it == index_.end()) return false;
  std::size_t pos = it->second;
  index_.erase(it);
  if (pos + 1 != elems_.size()) {
    elems_[pos] = std::move(elems_.back());
    index_[elems_[pos]] = pos;
  }
  elems_.pop_back();
  ++version_;
  return true;
}

bool SetObj::same_contents(const SetObj& other) const {
  if (size() != other.size()) return false;
  return std::all_of(elems_.begin(), elems_.end(),
                     [&](const Value& v) { return other.contains(v); });
}

bool SetObj::assign(const std::vector<Value>& elems) {
  std::unordered_set<Value, ValueHash> incoming(elems.begin(), elems.end());
  bool same = incoming.size() == elems_.size() &&
              std::all_of(elems_.begin(), elems_.end(),
                          [&](const Value& v) { return incoming.contains(v); });
  if (same) return false;
  auto version = version_;
  elems_.clear();
  index_.clear();
  for (const auto& v : elems) insert(v);
  version_ = version + 1;
  return true;
}

Address Heap::allocate(std::string class_name, HeapObject object) {
  entries_.push_back(Entry{std::move(object), std::move(class_name)});
  return Address{entries_.size()};
}

namespace {
std::string field_key(Address a, const std::string& field) {
  return std::to_string(a.id) + "." + field;
}
}  // namespace

void Heap::register_derived_field(Address a, const std::string& field) {
  derived_fields_.insert(field_key(a, field));
}

bool Heap::is_derived_field(Address a, const std::string& field) const {
  return !derived_fields_.empty() && derived_fields_.contains(field_key(a, field));
}

std::optional<Value> deref(const Heap& heap, Address start, std::span<const std::string> fields) {
  Value current = Value::address(start);
  for (const auto& f : fields) {
    if (!current.is_addr() || !heap.is_record(current.as_addr())) return std::nullopt;
    const auto& rec = heap.record(current.as_addr());
    auto it = rec.fields.find(f);
    if (it == rec.fields.end()) return std::nullopt;
    current = it->second;
  }
  return current;
}

namespace {

class Canonicalizer {
 public:
  Canonicalizer(const Heap& heap, const std::function<bool(const std::string&)>& skip)
      : heap_(heap), skip_(skip) {}

  std::string run(Address root) {
    visit(root);
    return out_.str();
  }

 private:
  // Order-independent key for sorting set elements.
  std::string shape_key(const Value& v) const {
    if (v.is_addr()) {
      return heap_.contains(v.as_addr()) ? "@" + heap_.type_of(v.as_addr()) : "@?";
    }
    if (v.is_tuple()) {
      std::string s = "(";
      for (const auto& e : v.as_tuple()) s += shape_key(e) + ",";
      return s + ")";
    }
    return to_string(v);
  }

  std::string ref(const Value& v) {
    if (v.is_addr()) {
      auto a = v.as_addr();
      auto it = ids_.find(a.id);
      if (it == ids_.end()) {
        it = ids_.emplace(a.id, ids_.size() + 1).first;
        pending_.push_back(a);
      }
      return "#" + std::to_string(it->second);
    }
    if (v.is_tuple()) {
      std::string s = "(";
      for (const auto& e : v.as_tuple()) s += ref(e) + ",";
      return s + ")";
    }
    return to_string(v);
  }

  void visit(Address root) {
    ref(Value::address(root));
    for (std::size_t i = 0; i < pending_.size(); ++i) emit(pending_[i]);
  }

  void emit(Address a) {
    out_ << "#" << ids_.at(a.id) << ":";
    if (!heap_.contains(a)) {
      out_ << "dangling\n";
      return;
    }
    out_ << heap_.type_of(a) << " ";
    const auto& obj = heap_.object(a);
    if (const auto* rec = std::get_if<RecordObj>(&obj)) {
      out_ << "{";
      for (const auto& [name, value] : rec->fields) {
        if (skip_ && skip_(name)) continue;
        out_ << name << "=" << ref(value) << ";";
      }
      out_ << "}\n";
    } else if (const auto* set = std::get_if<SetObj>(&obj)) {
      std::vector<Value> elems = set->elements();
      std::stable_sort(elems.begin(), elems.end(), [&](const Value& x, const Value& y) {
        auto kx = shape_key(x);
        auto ky = shape_key(y);
        if (kx != ky) return kx < ky;
        return canonical_compare(x, y) < 0;
      });
      out_ << "set{";
      for (const auto& e : elems) out_ << ref(e) << ";";
      out_ << "}\n";
    } else {
      out_ << "seq[";
      for (const auto& e : std::get<SeqObj>(obj).elems) out_ << ref(e) << ";";
      out_ << "]\n";
    }
  }

  const Heap& heap_;
  const std::function<bool(const std::string&)>& skip_;
  std::unordered_map<std::uint64_t, std::size_t> ids_;
  std::vector<Address> pending_;
  std::ostringstream out_;
};

}  // namespace

std::string canonical_dump(const Heap& heap, Address root,
                           const std::function<bool(const std::string&)>& skip_field) {
  return Canonicalizer(heap, skip_field).run(root);
}

}  // namespace alda
