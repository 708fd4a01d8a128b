#include "alda/runtime.hpp"

#include <algorithm>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_map>

#include "alda/parser.hpp"
#include "lower_common.hpp"

namespace alda {

using namespace ast;

namespace {

[[noreturn]] void fail(RuntimeErrorKind k, std::string msg, SourceLoc loc = {}) {
  throw RuntimeError(k, std::move(msg), loc);
}

void check_overflow(bool overflow, SourceLoc loc) {
  if (overflow) fail(RuntimeErrorKind::IntegerOverflow, "integer overflow", loc);
}

struct Frame {
  std::optional<Address> self;
  std::string cls;  // class defining the running method
  std::unordered_map<std::string, Value> params;
  std::unordered_map<std::string, Value> locals;
  std::vector<std::pair<std::string, Value>> bound;
  Value ret;
};

/// Pushes a bound variable for the lifetime of the guard.
struct BoundGuard {
  Frame& f;
  BoundGuard(Frame& fr, const std::string& name, Value v) : f(fr) {
    f.bound.emplace_back(name, std::move(v));
  }
  ~BoundGuard() { f.bound.pop_back(); }
  void set(Value v) { f.bound.back().second = std::move(v); }
};

const std::string& binder_name(const Pattern& p, SourceLoc loc) {
  if (const auto* v = std::get_if<pat::Var>(&p.node)) {
    if (v->var->is<ex::Var>()) return v->var->as<ex::Var>().name;
  }
  fail(RuntimeErrorKind::TypeError, "iterator pattern is not a variable", loc);
}

}  // namespace

std::string display_value(const Heap& heap, const Value& v, bool top) {
  switch (v.kind()) {
    case Value::Kind::Str:
      return top ? v.as_str() : to_string(v);
    case Value::Kind::Tuple: {
      auto t = v.as_tuple();
      std::string s = "(";
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) s += ", ";
        s += display_value(heap, t[i], false);
      }
      return s + (t.size() == 1 ? ",)" : ")");
    }
    case Value::Kind::Addr: {
      Address a = v.as_addr();
      if (!heap.contains(a)) return to_string(v);
      if (heap.is_set(a)) {
        std::vector<Value> elems = heap.set(a).elements();
        std::sort(elems.begin(), elems.end(), CanonicalLess{});
        std::string s = "{";
        for (std::size_t i = 0; i < elems.size(); ++i) {
          if (i) s += ", ";
          const Value& e = elems[i];
          bool unwrap = e.is_tuple() && e.as_tuple().size() == 1;
          s += display_value(heap, unwrap ? e.as_tuple()[0] : e, false);
        }
        return s + "}";
      }
      if (const auto* q = std::get_if<SeqObj>(&heap.object(a))) {
        std::string s = "[";
        for (std::size_t i = 0; i < q->elems.size(); ++i) {
          if (i) s += ", ";
          s += display_value(heap, q->elems[i], false);
        }
        return s + "]";
      }
      return heap.type_of(a) + to_string(v);
    }
    default:
      return to_string(v);
  }
}

struct Interpreter::Impl {
  const Interpreter* owner = nullptr;
  const CompiledProgram& prog;
  RunOptions opt;
  std::ostream& out;
  Heap heap;
  Address gv;
  RunStats stats;
  detail::ClassTable ct;
  std::map<std::string, std::vector<const CompiledRuleSet*>> class_rulesets;
  std::map<std::string, std::set<std::string>> derived_fields_of;  // class -> field names
  std::vector<Address> bearing;
  std::map<std::pair<std::uint64_t, std::string>, std::vector<std::uint64_t>> sig_cache;
  std::mt19937_64 rng;
  std::uint64_t mutations = 0;
  std::uint64_t clean_mark = 0;

  Impl(const CompiledProgram& p, RunOptions o)
      : prog(p), opt(std::move(o)), out(opt.out ? *opt.out : std::cout), ct(p.kernel),
        rng(opt.seed.value_or(0)) {
    for (const auto& c : prog.kernel.classes) {
      std::vector<const CompiledRuleSet*> rs;
      std::set<std::string> dfields;
      for (const auto& k : ct.chain(c.name)) {
        for (const auto& def : ct.find(k)->rulesets) {
          const auto& crs = prog.rulesets.at(def.name);
          rs.push_back(&crs);
          for (const auto& d : crs.nonlocal_derived) {
            const auto& ref = crs.info.find(d)->ref;
            if (ref.scope == PredicateRef::Scope::Self) dfields.insert(ref.path[0]);
          }
        }
      }
      class_rulesets[c.name] = std::move(rs);
      derived_fields_of[c.name] = std::move(dfields);
    }
    gv = heap.allocate(kGlobalsClass, RecordObj{});
    if (!rulesets_of(kGlobalsClass).empty()) bearing.push_back(gv);
  }

  // -------------------------------------------------------------------------
  // Heap helpers

  void touch() { ++mutations; }

  const std::vector<const CompiledRuleSet*>& rulesets_of(const std::string& cls) const {
    static const std::vector<const CompiledRuleSet*> none;
    auto it = class_rulesets.find(cls);
    return it == class_rulesets.end() ? none : it->second;
  }

  Address new_object(const std::string& cls, SourceLoc loc) {
    Address a;
    if (cls == kSetClass) {
      a = heap.allocate_set();
    } else if (cls == kSequenceClass) {
      a = heap.allocate(kSequenceClass, SeqObj{});
    } else if (ct.find(cls)) {
      a = heap.allocate(cls, RecordObj{});
      if (!rulesets_of(cls).empty()) bearing.push_back(a);
    } else {
      fail(RuntimeErrorKind::UnknownClass, "no class named " + cls, loc);
    }
    touch();
    return a;
  }

  Address new_set(const std::vector<Value>& elems) {
    Address a = heap.allocate_set();
    heap.set(a).assign(elems);
    touch();
    return a;
  }

  Address record_addr(const Value& v, const std::string& what, SourceLoc loc) const {
    if (!v.is_addr() || !heap.is_record(v.as_addr())) {
      fail(RuntimeErrorKind::TypeError, what + " on non-object " + display_value(heap, v), loc);
    }
    return v.as_addr();
  }

  void write_field(const Value& obj, const std::string& f, Value v, SourceLoc loc) {
    Address a = record_addr(obj, "field assignment", loc);
    if (heap.is_derived_field(a, f) || derived_fields_of[heap.type_of(a)].contains(f)) {
      fail(RuntimeErrorKind::DerivedWrite, "assignment to derived predicate field " + f, loc);
    }
    heap.record(a).fields[f] = std::move(v);
    touch();
  }

  Value read_field(const Value& obj, const std::string& f, SourceLoc loc) const {
    if (!obj.is_addr() || !heap.contains(obj.as_addr())) {
      fail(RuntimeErrorKind::TypeError, "field access ." + f + " on " + display_value(heap, obj),
           loc);
    }
    Address a = obj.as_addr();
    if (heap.is_record(a)) {
      const auto& fields = heap.record(a).fields;
      auto it = fields.find(f);
      if (it != fields.end()) return it->second;
    }
    if (a == gv) fail(RuntimeErrorKind::FieldUndefined, "global " + f + " is undefined", loc);
    fail(RuntimeErrorKind::FieldUndefined,
         "field " + f + " undefined on " + heap.type_of(a) + to_string(obj), loc);
  }

  /// Elements of a set or sequence, copied; sets in a seeded order when asked.
  std::vector<Value> snapshot(const Value& v, SourceLoc loc) {
    if (v.is_addr() && heap.contains(v.as_addr())) {
      Address a = v.as_addr();
      if (heap.is_set(a)) {
        std::vector<Value> elems = heap.set(a).elements();
        if (opt.seed) std::shuffle(elems.begin(), elems.end(), rng);
        return elems;
      }
      if (const auto* q = std::get_if<SeqObj>(&heap.object(a))) return q->elems;
    }
    fail(RuntimeErrorKind::TypeError, "not a collection: " + display_value(heap, v), loc);
  }

  // -------------------------------------------------------------------------
  // Inference

  std::optional<Value> base_value(Address a, const CompiledRuleSet& rs,
                                  const std::string& key) const {
    const auto& ref = rs.info.find(key)->ref;
    Address start = ref.scope == PredicateRef::Scope::Global ? gv : a;
    return deref(heap, start, ref.path);
  }

  std::vector<Value> facts_of(const Value& v, std::size_t arity, const std::string& what) const {
    if (!v.is_addr() || !heap.is_set(v.as_addr())) {
      fail(RuntimeErrorKind::BaseNotASet, what + " holds " + display_value(heap, v) +
                                              ", which is not a set");
    }
    const auto& elems = heap.set(v.as_addr()).elements();
    if (arity != 1) return elems;
    std::vector<Value> rows;
    rows.reserve(elems.size());
    for (const auto& e : elems) {
      rows.push_back(e.is_tuple() && e.as_tuple().size() == 1 ? e : Value::tuple({e}));
    }
    return rows;
  }

  datalog::FactStore nonlocal_bases(Address a, const CompiledRuleSet& rs) const {
    datalog::FactStore input;
    for (const auto& key : rs.nonlocal_base) {
      auto v = base_value(a, rs, key);
      auto& rows = input[key];
      if (v) rows = facts_of(*v, rs.info.find(key)->arity, "base predicate " + key + " of " + rs.name);
    }
    return input;
  }

  std::pair<Address, std::string> derived_slot(Address a, const CompiledRuleSet& rs,
                                               const std::string& key) const {
    const auto& ref = rs.info.find(key)->ref;
    if (ref.scope == PredicateRef::Scope::Global) return {gv, ref.path[0]};
    return {a, ref.path[0]};
  }

  /// updateVar: makes field f of a refer to a set with the given contents,
  /// reusing the set already there.
  bool update_var(Address a, const std::string& f, const std::vector<Value>& facts,
                  MaintenanceEvent* ev, const std::string& key) {
    auto& fields = heap.record(a).fields;
    auto it = fields.find(f);
    bool changed = false;
    Address target;
    if (it != fields.end() && it->second.is_addr() && heap.is_set(it->second.as_addr())) {
      target = it->second.as_addr();
      if (ev) {
        const SetObj& old = heap.set(target);
        MaintenanceEvent::Delta d{key, 0, 0};
        std::unordered_set<Value, ValueHash> now(facts.begin(), facts.end());
        for (const auto& x : facts) d.added += !old.contains(x);
        for (const auto& x : old.elements()) d.removed += !now.contains(x);
        ev->deltas.push_back(d);
      }
      changed = heap.set(target).assign(facts);
    } else {
      target = heap.allocate_set();
      heap.set(target).assign(facts);
      heap.record(a).fields[f] = Value::address(target);  // allocation moved the heap
      changed = true;
      if (ev) ev->deltas.push_back({key, facts.size(), 0});
    }
    heap.register_derived_field(a, f);
    heap.mark_derived_storage(target);
    if (changed) touch();
    return changed;
  }

  struct InferResult {
    bool changed = false;
    datalog::FactStore facts;
    std::set<std::string> defined;
  };

  InferResult inf_update(Address a, const CompiledRuleSet& rs,
                         const std::map<std::string, std::vector<Value>>& kwargs, bool implicit) {
    InferResult r;
    datalog::FactStore input = nonlocal_bases(a, rs);
    std::set<std::string> given(rs.nonlocal_base.begin(), rs.nonlocal_base.end());
    for (const auto& [k, rows] : kwargs) {
      input[k] = rows;
      given.insert(k);
    }
    r.defined = implicit ? rs.maintained : fully_depends(rs.info, given);
    ++stats.inferences;
    r.facts = rs.program->evaluate(input);
    MaintenanceEvent ev{rs.name, a, {}};
    MaintenanceEvent* evp = implicit && opt.on_maintain ? &ev : nullptr;
    for (const auto& key : rs.nonlocal_derived) {
      if (!r.defined.contains(key)) continue;
      auto [obj, f] = derived_slot(a, rs, key);
      r.changed |= update_var(obj, f, r.facts[key], evp, key);
    }
    if (evp && r.changed) opt.on_maintain(ev);
    return r;
  }

  std::vector<std::uint64_t> signature(Address a, const CompiledRuleSet& rs) const {
    std::vector<std::uint64_t> sig;
    auto add = [&](const std::optional<Value>& v) {
      if (!v) {
        sig.insert(sig.end(), {0, 0});
      } else if (v->is_addr() && heap.is_set(v->as_addr())) {
        sig.insert(sig.end(), {v->as_addr().id, heap.set(v->as_addr()).version()});
      } else {
        sig.insert(sig.end(), {std::numeric_limits<std::uint64_t>::max(), v->hash()});
      }
    };
    for (const auto& key : rs.nonlocal_base) add(base_value(a, rs, key));
    for (const auto& key : rs.maintained) {
      auto [obj, f] = derived_slot(a, rs, key);
      const auto& fields = heap.record(obj).fields;
      auto it = fields.find(f);
      add(it == fields.end() ? std::nullopt : std::optional<Value>(it->second));
    }
    return sig;
  }

  /// Re-runs every attached rule set whose inputs changed until nothing does.
  void maintain() {
    ++stats.maintain_calls;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < bearing.size(); ++i) {
        Address a = bearing[i];
        for (const auto* rs : rulesets_of(heap.type_of(a))) {
          auto sig = signature(a, *rs);
          auto& cached = sig_cache[{a.id, rs->name}];
          if (cached == sig) continue;
          changed |= inf_update(a, *rs, {}, true).changed;
          cached = signature(a, *rs);
        }
      }
    }
    clean_mark = mutations;
  }

  const CompiledRuleSet& resolve_ruleset(Address a, const std::string& name, SourceLoc loc) const {
    const std::string& cls = heap.type_of(a);
    auto it = prog.rulesets.find(name);
    if (it != prog.rulesets.end() && ct.is_subclass(cls, it->second.owner)) return it->second;
    for (const auto& k : ct.chain(cls)) {
      auto jt = prog.rulesets.find(k + "." + name);
      if (jt != prog.rulesets.end()) return jt->second;
    }
    fail(RuntimeErrorKind::UnknownRuleSet, "no rule set " + name + " for " + cls, loc);
  }

  static std::string query_key(const CompiledRuleSet& rs, const std::string& q) {
    if (rs.info.find(q)) return q;
    if (rs.info.find("self." + q)) return "self." + q;
    return q;
  }

  void exec_infer(const st::Infer& s, Frame& f, SourceLoc loc) {
    const InferCall& call = s.call;
    if (!call.target) fail(RuntimeErrorKind::TypeError, "infer without a target object", loc);
    // Target objects of the assignments come first, left to right.
    std::vector<std::optional<Value>> target_objs;
    for (const auto& t : s.targets) {
      if (t.is<ex::Field>()) {
        target_objs.push_back(eval(*t.as<ex::Field>().object, f));
      } else {
        target_objs.push_back(std::nullopt);
      }
    }
    Address a = record_addr(eval(**call.target, f), "infer", loc);
    const CompiledRuleSet& rs = resolve_ruleset(a, call.ruleset, loc);
    std::map<std::string, std::vector<Value>> kwargs;
    for (const auto& kw : call.kwargs) {
      const PredicateInfo* pi = rs.info.find(kw.name);
      if (!pi || pi->derived || !pi->local()) {
        fail(RuntimeErrorKind::NotABasePredicate,
             kw.name + " is not a local base predicate of " + rs.name, loc);
      }
      Value v = eval(*kw.value, f);
      kwargs[kw.name] = facts_of(v, pi->arity, "argument " + kw.name);
    }
    InferResult r = inf_update(a, rs, kwargs, false);
    std::vector<Value> answers;
    for (const auto& q : call.queries) {
      std::string key = query_key(rs, q.predicate);
      if (!rs.info.is_derived(key) || !r.defined.contains(key)) {
        fail(RuntimeErrorKind::UndefinedPredicate,
             q.predicate + " is not defined by the given base predicates of " + rs.name, q.loc);
      }
      if (rs.info.find(key)->local()) {
        answers.push_back(Value::address(new_set(r.facts[key])));
      } else {
        auto [obj, fld] = derived_slot(a, rs, key);
        answers.push_back(heap.record(obj).fields.at(fld));
      }
    }
    if (!s.targets.empty() && s.targets.size() != answers.size()) {
      fail(RuntimeErrorKind::ArityMismatch, "infer returns " + std::to_string(answers.size()) +
                                                " results for " + std::to_string(s.targets.size()) +
                                                " targets", loc);
    }
    for (std::size_t i = 0; i < s.targets.size(); ++i) {
      if (target_objs[i]) {
        write_field(*target_objs[i], s.targets[i].as<ex::Field>().name, answers[i], loc);
      } else {
        assign_var(s.targets[i], answers[i], f, loc);
      }
    }
    touch();
    maintain();
  }

  // -------------------------------------------------------------------------
  // Expressions

  const Value& lookup(const ex::Var& v, const Frame& f, SourceLoc loc) const {
    switch (v.kind) {
      case VarKind::Bound:
        for (auto it = f.bound.rbegin(); it != f.bound.rend(); ++it) {
          if (it->first == v.name) return it->second;
        }
        break;
      case VarKind::Param: {
        auto it = f.params.find(v.name);
        if (it != f.params.end()) return it->second;
        break;
      }
      default: {
        auto it = f.locals.find(v.name);
        if (it != f.locals.end()) return it->second;
        break;
      }
    }
    fail(RuntimeErrorKind::UnboundVariable, "variable " + v.name + " has no value", loc);
  }

  bool truth(const Value& v, SourceLoc loc) const {
    if (!v.is_bool()) fail(RuntimeErrorKind::TypeError, "expected a boolean, got " + display_value(heap, v), loc);
    return v.as_bool();
  }

  std::int64_t integer(const Value& v, SourceLoc loc, const char* op) const {
    if (!v.is_int()) {
      fail(RuntimeErrorKind::TypeError,
           std::string(op) + " expects integers, got " + display_value(heap, v, false), loc);
    }
    return v.as_int();
  }

  Value eval(const Expr& e, Frame& f) {
    const SourceLoc loc = e.loc;
    return std::visit(
        [&](const auto& n) -> Value {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ex::Literal>) {
            return n.value;
          } else if constexpr (std::is_same_v<T, ex::Var>) {
            return lookup(n, f, loc);
          } else if constexpr (std::is_same_v<T, ex::SelfRef>) {
            if (!f.self) fail(RuntimeErrorKind::UnboundVariable, "self outside a method", loc);
            return Value::address(*f.self);
          } else if constexpr (std::is_same_v<T, ex::GlobalsRef>) {
            return Value::address(gv);
          } else if constexpr (std::is_same_v<T, ex::Field>) {
            return read_field(eval(*n.object, f), n.name, loc);
          } else if constexpr (std::is_same_v<T, ex::Tuple>) {
            std::vector<Value> xs;
            xs.reserve(n.elems.size());
            for (const auto& x : n.elems) xs.push_back(eval(x, f));
            return Value::tuple(std::move(xs));
          } else if constexpr (std::is_same_v<T, ex::Unary>) {
            return unary(n.op, eval(*n.operand, f), loc);
          } else if constexpr (std::is_same_v<T, ex::Binary>) {
            return binary(n, f, loc);
          } else if constexpr (std::is_same_v<T, ex::IsInstance>) {
            Value v = eval(*n.operand, f);
            if (!v.is_addr() || !heap.contains(v.as_addr())) return Value::boolean(false);
            const std::string& t = heap.type_of(v.as_addr());
            return Value::boolean(t == n.class_name || ct.is_subclass(t, n.class_name));
          } else if constexpr (std::is_same_v<T, ex::Quant>) {
            return quant(n, f, loc);
          } else if constexpr (std::is_same_v<T, ex::Aggregate>) {
            return aggregate(n.op, snapshot(eval(*n.operand, f), loc), loc);
          } else if constexpr (std::is_same_v<T, ex::Call>) {
            return call(n, f, loc);
          } else {
            fail(RuntimeErrorKind::TypeError, "construct not in the kernel: " + pretty_print(e), loc);
          }
        },
        e.node);
  }

  Value unary(UnaryOp op, const Value& v, SourceLoc loc) const {
    switch (op) {
      case UnaryOp::Not: return Value::boolean(!truth(v, loc));
      case UnaryOp::Neg: {
        std::int64_t x = integer(v, loc, "negation");
        std::int64_t r = 0;
        check_overflow(__builtin_sub_overflow(std::int64_t{0}, x, &r), loc);
        return Value::integer(r);
      }
      case UnaryOp::IsTuple: return Value::boolean(v.is_tuple());
      case UnaryOp::Len:
        if (!v.is_tuple()) fail(RuntimeErrorKind::NotATuple, "len of non-tuple " + display_value(heap, v, false), loc);
        return Value::integer(static_cast<std::int64_t>(v.as_tuple().size()));
    }
    return Value::none();
  }

  Value binary(const ex::Binary& b, Frame& f, SourceLoc loc) {
    if (b.op == BinaryOp::Or || b.op == BinaryOp::And) {
      bool l = truth(eval(*b.lhs, f), loc);
      if (b.op == BinaryOp::Or ? l : !l) return Value::boolean(l);
      return Value::boolean(truth(eval(*b.rhs, f), loc));
    }
    Value l = eval(*b.lhs, f);
    Value r = eval(*b.rhs, f);
    switch (b.op) {
      case BinaryOp::Is: return Value::boolean(l == r);
      case BinaryOp::IsNot: return Value::boolean(!(l == r));
      case BinaryOp::Lt:
      case BinaryOp::Le:
      case BinaryOp::Gt:
      case BinaryOp::Ge: {
        bool comparable = (l.is_int() && r.is_int()) || (l.is_str() && r.is_str());
        if (!comparable) {
          fail(RuntimeErrorKind::TypeError, "cannot order " + display_value(heap, l, false) +
                                                " and " + display_value(heap, r, false), loc);
        }
        auto c = canonical_compare(l, r);
        switch (b.op) {
          case BinaryOp::Lt: return Value::boolean(c < 0);
          case BinaryOp::Le: return Value::boolean(c <= 0);
          case BinaryOp::Gt: return Value::boolean(c > 0);
          default: return Value::boolean(c >= 0);
        }
      }
      case BinaryOp::In:
      case BinaryOp::NotIn: {
        bool in = member(l, r, loc);
        return Value::boolean(b.op == BinaryOp::In ? in : !in);
      }
      case BinaryOp::Add:
      case BinaryOp::Sub:
        if (is_set_value(l) && is_set_value(r)) return set_arith(b.op, l, r);
        return arith(b.op, l, r, loc);
      case BinaryOp::Mul:
      case BinaryOp::Div:
      case BinaryOp::Mod: return arith(b.op, l, r, loc);
      case BinaryOp::Select: {
        if (!l.is_tuple()) fail(RuntimeErrorKind::NotATuple, "select on non-tuple " + display_value(heap, l, false), loc);
        std::int64_t i = integer(r, loc, "select");
        auto t = l.as_tuple();
        if (i < 1 || static_cast<std::size_t>(i) > t.size()) {
          fail(RuntimeErrorKind::IndexOutOfRange, "component " + std::to_string(i) + " of a " +
                                                      std::to_string(t.size()) + "-tuple", loc);
        }
        return t[static_cast<std::size_t>(i - 1)];
      }
      default: return Value::none();
    }
  }

  bool member(const Value& x, const Value& coll, SourceLoc loc) const {
    if (coll.is_addr() && heap.contains(coll.as_addr())) {
      Address a = coll.as_addr();
      if (heap.is_set(a)) return heap.set(a).contains(x);
      if (const auto* q = std::get_if<SeqObj>(&heap.object(a))) {
        return std::find(q->elems.begin(), q->elems.end(), x) != q->elems.end();
      }
    }
    if (coll.is_tuple()) {
      auto t = coll.as_tuple();
      return std::find(t.begin(), t.end(), x) != t.end();
    }
    fail(RuntimeErrorKind::TypeError, "membership in non-collection " + display_value(heap, coll), loc);
  }

  bool is_set_value(const Value& v) const { return v.is_addr() && heap.is_set(v.as_addr()); }

  /// Union or difference, as a fresh set.
  Value set_arith(BinaryOp op, const Value& l, const Value& r) {
    const SetObj& a = heap.set(l.as_addr());
    const SetObj& b = heap.set(r.as_addr());
    std::vector<Value> out;
    for (const auto& x : a.elements()) {
      if (op == BinaryOp::Add || !b.contains(x)) out.push_back(x);
    }
    if (op == BinaryOp::Add) {
      for (const auto& x : b.elements()) {
        if (!a.contains(x)) out.push_back(x);
      }
    }
    return Value::address(new_set(out));
  }

  Value arith(BinaryOp op, const Value& l, const Value& r, SourceLoc loc) const {
    const char* name = op == BinaryOp::Add   ? "+"
                       : op == BinaryOp::Sub ? "-"
                       : op == BinaryOp::Mul ? "*"
                       : op == BinaryOp::Div ? "/"
                                             : "%";
    std::int64_t x = integer(l, loc, name);
    std::int64_t y = integer(r, loc, name);
    std::int64_t z = 0;
    switch (op) {
      case BinaryOp::Add:
        check_overflow(__builtin_add_overflow(x, y, &z), loc);
        return Value::integer(z);
      case BinaryOp::Sub:
        check_overflow(__builtin_sub_overflow(x, y, &z), loc);
        return Value::integer(z);
      case BinaryOp::Mul:
        check_overflow(__builtin_mul_overflow(x, y, &z), loc);
        return Value::integer(z);
      default: break;
    }
    if (y == 0) fail(RuntimeErrorKind::DivisionByZero, "division by zero", loc);
    if (x == std::numeric_limits<std::int64_t>::min() && y == -1) {
      if (op == BinaryOp::Mod) return Value::integer(0);
      fail(RuntimeErrorKind::IntegerOverflow, "integer overflow", loc);
    }
    // Floor division and a remainder with the divisor's sign.
    std::int64_t q = x / y;
    std::int64_t m = x % y;
    if (m != 0 && ((m < 0) != (y < 0))) {
      --q;
      m += y;
    }
    return Value::integer(op == BinaryOp::Div ? q : m);
  }

  Value quant(const ex::Quant& q, Frame& f, SourceLoc loc) {
    if (q.iters.empty()) return Value::boolean(truth(eval(*q.cond, f), loc));
    // Several iterators nest; the lowered kernel only has one.
    std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
      if (i == q.iters.size()) {
        bool c = truth(eval(*q.cond, f), loc);
        return q.quantifier == Quantifier::Some ? c : !c;
      }
      const auto& it = q.iters[i];
      const std::string& name = binder_name(*it.pattern, loc);
      auto elems = snapshot(eval(*it.domain, f), loc);
      BoundGuard g(f, name, Value::none());
      for (const auto& x : elems) {
        g.set(x);
        if (go(i + 1)) return true;
      }
      return false;
    };
    bool found = go(0);
    return Value::boolean(q.quantifier == Quantifier::Some ? found : !found);
  }

  Value aggregate(AggregateOp op, const std::vector<Value>& xs, SourceLoc loc) const {
    if (op == AggregateOp::Count) return Value::integer(static_cast<std::int64_t>(xs.size()));
    if (op == AggregateOp::Sum) {
      std::int64_t s = 0;
      for (const auto& x : xs) {
        std::int64_t v = integer(x, loc, "sum");
        check_overflow(__builtin_add_overflow(s, v, &s), loc);
      }
      return Value::integer(s);
    }
    if (xs.empty()) {
      fail(RuntimeErrorKind::EmptyAggregate,
           std::string(op == AggregateOp::Max ? "max" : "min") + " of an empty collection", loc);
    }
    bool ints = xs[0].is_int();
    for (const auto& x : xs) {
      if (!(ints ? x.is_int() : x.is_str())) {
        fail(RuntimeErrorKind::TypeError, "max/min needs all integers or all strings", loc);
      }
    }
    auto less = [](const Value& a, const Value& b) { return canonical_compare(a, b) < 0; };
    return op == AggregateOp::Max ? *std::max_element(xs.begin(), xs.end(), less)
                                  : *std::min_element(xs.begin(), xs.end(), less);
  }

  Value call(const ex::Call& c, Frame& f, SourceLoc loc) {
    if (c.kind == CallKind::Builtin) {
      std::vector<Value> args;
      for (const auto& a : c.args) args.push_back(eval(a, f));
      return builtin(c.method, args, loc);
    }
    if (c.kind == CallKind::Super) {
      std::vector<Value> args;
      for (const auto& a : c.args) args.push_back(eval(a, f));
      const ClassDef* def = ct.find(f.cls);
      if (!f.self || !def || !def->base) {
        fail(RuntimeErrorKind::MethodUndefined, "no superclass method " + c.method, loc);
      }
      return invoke(*f.self, *def->base, c.method, args, loc);
    }
    if (c.kind != CallKind::Method || !c.target) {
      fail(RuntimeErrorKind::MethodUndefined, "unresolved call " + c.method, loc);
    }
    Value target = eval(**c.target, f);
    std::vector<Value> args;
    for (const auto& a : c.args) args.push_back(eval(a, f));
    if (!target.is_addr() || !heap.contains(target.as_addr())) {
      fail(RuntimeErrorKind::TypeError,
           "method " + c.method + " called on " + display_value(heap, target, false), loc);
    }
    Address a = target.as_addr();
    if (!heap.is_record(a)) return collection_method(a, c.method, args, loc);
    return invoke(a, heap.type_of(a), c.method, args, loc);
  }

  Value collection_method(Address a, const std::string& m, const std::vector<Value>& args,
                          SourceLoc loc) {
    auto arity = [&](std::size_t n) {
      if (args.size() != n) {
        fail(RuntimeErrorKind::ArityMismatch, m + " takes " + std::to_string(n) + " argument(s)", loc);
      }
    };
    bool is_set = heap.is_set(a);
    if (m == "add" || m == "del") {
      arity(1);
      if (is_set && heap.is_derived_storage(a)) {
        fail(RuntimeErrorKind::DerivedWrite, m + " on a set holding a derived predicate", loc);
      }
      bool changed;
      if (is_set) {
        changed = m == "add" ? heap.set(a).insert(args[0]) : heap.set(a).erase(args[0]);
      } else {
        auto& elems = std::get<SeqObj>(heap.object(a)).elems;
        if (m == "add") {
          elems.push_back(args[0]);
          changed = true;
        } else {
          auto it = std::find(elems.begin(), elems.end(), args[0]);
          changed = it != elems.end();
          if (changed) elems.erase(it);
        }
      }
      if (changed) touch();
      return Value::none();
    }
    if (m == "any") {
      arity(0);
      auto elems = snapshot(Value::address(a), loc);
      return elems.empty() ? Value::none() : elems.front();
    }
    if (m == "copy") {
      arity(0);
      if (is_set) return Value::address(new_set(heap.set(a).elements()));
      Address b = heap.allocate(kSequenceClass, std::get<SeqObj>(heap.object(a)));
      touch();
      return Value::address(b);
    }
    fail(RuntimeErrorKind::MethodUndefined, "no method " + m + " on " + heap.type_of(a), loc);
  }

  Value builtin(const std::string& name, const std::vector<Value>& args, SourceLoc loc) {
    if (name == "print") {
      std::string line;
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) line += ' ';
        line += display_value(heap, args[i]);
      }
      out << line << '\n';
      return Value::none();
    }
    if (name == "load_facts") {
      if (args.size() != 1 || !args[0].is_str()) {
        fail(RuntimeErrorKind::ArityMismatch, "load_facts takes one path string", loc);
      }
      if (!opt.load_facts) fail(RuntimeErrorKind::IoError, "load_facts is unavailable", loc);
      try {
        return Value::address(new_set(opt.load_facts(args[0].as_str())));
      } catch (const RuntimeError& e) {
        throw e.with_loc(loc);
      }
    }
    fail(RuntimeErrorKind::MethodUndefined, "no builtin " + name, loc);
  }

  Value invoke(Address self, const std::string& start, const std::string& name,
               const std::vector<Value>& args, SourceLoc loc) {
    const Method* m = nullptr;
    std::string owner;
    for (const auto& k : ct.chain(start)) {
      for (const auto& meth : ct.find(k)->methods) {
        if (meth.name == name) {
          m = &meth;
          owner = k;
          break;
        }
      }
      if (m) break;
    }
    if (!m) fail(RuntimeErrorKind::MethodUndefined, "no method " + name + " in " + start, loc);
    if (m->params.size() != args.size()) {
      fail(RuntimeErrorKind::ArityMismatch, name + " takes " + std::to_string(m->params.size()) +
                                                " argument(s), got " + std::to_string(args.size()),
           loc);
    }
    Frame callee;
    callee.self = self;
    callee.cls = owner;
    for (std::size_t i = 0; i < args.size(); ++i) callee.params[m->params[i]] = args[i];
    exec_block(m->body, callee);
    return callee.ret;
  }

  // -------------------------------------------------------------------------
  // Statements

  void assign_var(const Expr& target, Value v, Frame& f, SourceLoc loc) {
    if (!target.is<ex::Var>() || target.as<ex::Var>().kind != VarKind::Local) {
      fail(RuntimeErrorKind::TypeError, "cannot assign to " + pretty_print(target), loc);
    }
    f.locals[target.as<ex::Var>().name] = std::move(v);
  }

  /// Returns true when a return statement ran.
  bool exec_block(const Block& b, Frame& f) {
    for (const auto& s : b) {
      std::uint64_t before = mutations;
      bool returned;
      try {
        returned = exec_stmt(s, f);
        after_stmt(s, before);
        notify(s);
      } catch (const RuntimeError& e) {
        throw e.with_loc(s.loc);
      }
      if (returned) return true;
    }
    return false;
  }

  void after_stmt(const Stmt& s, std::uint64_t before) {
    ++stats.statements;
    if (mutations == before || mutations == clean_mark) return;
    if (opt.policy == MaintenancePolicy::Flagged) {
      const UpdateSite* site = prog.sites.find(&s);
      if (!site || site->kind == SiteKind::LocalOnly) return;
    }
    maintain();
  }

  void notify(const Stmt& s) {
    if (opt.after_statement) opt.after_statement(*owner, s);
  }

  bool exec_stmt(const Stmt& s, Frame& f) {
    const SourceLoc loc = s.loc;
    return std::visit(
        [&](const auto& n) -> bool {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, st::Skip>) {
            return false;
          } else if constexpr (std::is_same_v<T, st::Assign>) {
            if (n.target.template is<ex::Field>()) {
              const auto& fld = n.target.template as<ex::Field>();
              Value obj = eval(*fld.object, f);
              write_field(obj, fld.name, eval(n.value, f), loc);
            } else {
              assign_var(n.target, eval(n.value, f), f, loc);
            }
            return false;
          } else if constexpr (std::is_same_v<T, st::NewObj>) {
            std::optional<Value> obj;
            if (n.target.template is<ex::Field>()) obj = eval(*n.target.template as<ex::Field>().object, f);
            Value v = Value::address(new_object(n.class_name, loc));
            if (obj) {
              write_field(*obj, n.target.template as<ex::Field>().name, v, loc);
            } else {
              assign_var(n.target, v, f, loc);
            }
            return false;
          } else if constexpr (std::is_same_v<T, st::Infer>) {
            exec_infer(n, f, loc);
            return false;
          } else if constexpr (std::is_same_v<T, st::If>) {
            if (truth(eval(n.cond, f), loc)) return exec_block(n.then_body, f);
            if (n.else_body) return exec_block(*n.else_body, f);
            return false;
          } else if constexpr (std::is_same_v<T, st::For>) {
            const std::string& name = binder_name(n.pattern, loc);
            auto elems = snapshot(eval(n.domain, f), loc);
            BoundGuard g(f, name, Value::none());
            for (const auto& x : elems) {
              g.set(x);
              if (exec_block(n.body, f)) return true;
            }
            return false;
          } else if constexpr (std::is_same_v<T, st::While>) {
            while (truth(eval(n.cond, f), loc)) {
              if (exec_block(n.body, f)) return true;
            }
            return false;
          } else if constexpr (std::is_same_v<T, st::ExprStmt>) {
            eval(n.expr, f);
            return false;
          } else if constexpr (std::is_same_v<T, st::Return>) {
            f.ret = n.value ? eval(*n.value, f) : Value::none();
            return true;
          } else {
            fail(RuntimeErrorKind::TypeError, "statement not in the kernel", loc);
          }
        },
        s.node);
  }

  void run() {
    for (const auto& [name, elems] : opt.global_sets) {
      Value v = Value::address(new_set(elems));
      heap.record(gv).fields[name] = v;
    }
    maintain();
    Frame top;
    exec_block(prog.kernel.top, top);
  }
};

Interpreter::Interpreter(const CompiledProgram& program, RunOptions options)
    : impl_(std::make_unique<Impl>(program, std::move(options))) {
  impl_->owner = this;
}
Interpreter::~Interpreter() = default;

void Interpreter::run() { impl_->run(); }
const Heap& Interpreter::heap() const { return impl_->heap; }
Address Interpreter::globals() const { return impl_->gv; }
const RunStats& Interpreter::stats() const { return impl_->stats; }

std::optional<Value> Interpreter::global(const std::string& name) const {
  const auto& fields = impl_->heap.record(impl_->gv).fields;
  auto it = fields.find(name);
  if (it == fields.end()) return std::nullopt;
  return it->second;
}

std::vector<Value> Interpreter::set_elements(const Value& v) const {
  const Heap& h = impl_->heap;
  if (!v.is_addr() || !h.is_set(v.as_addr())) {
    throw RuntimeError(RuntimeErrorKind::TypeError, "not a set: " + display_value(h, v));
  }
  std::vector<Value> out = h.set(v.as_addr()).elements();
  std::sort(out.begin(), out.end(), CanonicalLess{});
  return out;
}

std::string Interpreter::display(const Value& v) const { return display_value(impl_->heap, v); }

std::vector<Interpreter::MaintainedView> Interpreter::maintained_views() const {
  std::vector<MaintainedView> out;
  const Impl& im = *impl_;
  for (Address a : im.bearing) {
    for (const auto* rs : im.rulesets_of(im.heap.type_of(a))) {
      MaintainedView view{a, rs, im.nonlocal_bases(a, *rs), {}};
      for (const auto& key : rs->maintained) {
        auto [obj, f] = im.derived_slot(a, *rs, key);
        const auto& fields = im.heap.record(obj).fields;
        auto it = fields.find(f);
        auto& rows = view.derived[key];
        if (it != fields.end() && it->second.is_addr() && im.heap.is_set(it->second.as_addr())) {
          rows = im.heap.set(it->second.as_addr()).elements();
        }
      }
      out.push_back(std::move(view));
    }
  }
  return out;
}

}  // namespace alda
