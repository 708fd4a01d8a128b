#include "alda/datalog.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "alda/analysis.hpp"

namespace alda::datalog {

using namespace ast;

namespace {

using Sym = std::uint32_t;

class Symbols {
 public:
  Sym intern(const Value& v) {
    auto [it, fresh] = ids_.try_emplace(v, static_cast<Sym>(values_.size()));
    if (fresh) values_.push_back(v);
    return it->second;
  }
  const Value& value(Sym s) const { return values_[s]; }

 private:
  std::unordered_map<Value, Sym, ValueHash> ids_;
  std::vector<Value> values_;
};

std::uint64_t mix(std::uint64_t h, std::uint64_t x) {
  h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

// Append-only set of fixed-arity rows of symbols, with lazily built hash
// indexes keyed by which positions are bound. Not movable once indexed: the
// dedup set's hasher points back at the row storage.
class Relation {
 public:
  explicit Relation(std::size_t arity)
      : arity_(arity), dedup_(16, RowHash{this}, RowEq{this}) {}
  Relation(const Relation&) = delete;
  Relation& operator=(const Relation&) = delete;

  std::size_t arity() const { return arity_; }
  std::size_t size() const { return rows_; }
  const Sym* row(std::size_t i) const { return data_.data() + i * arity_; }

  bool insert(const Sym* r) {
    data_.insert(data_.end(), r, r + arity_);
    auto id = static_cast<std::uint32_t>(rows_);
    ++rows_;
    if (!dedup_.insert(id).second) {
      data_.resize(data_.size() - arity_);
      --rows_;
      return false;
    }
    return true;
  }

  // Row id of an exact match, or -1.
  std::int64_t find(const Sym* r) const {
    probe_row_ = r;
    auto it = dedup_.find(kProbe);
    probe_row_ = nullptr;
    return it == dedup_.end() ? -1 : static_cast<std::int64_t>(*it);
  }

  // Row ids whose positions in `mask` hash like `key` (caller verifies).
  const std::vector<std::uint32_t>* probe(std::uint32_t mask, std::uint64_t key_hash) {
    auto& idx = indexes_[mask];
    for (; idx.upto < rows_; ++idx.upto) {
      idx.buckets[masked_hash(row(idx.upto), mask)].push_back(static_cast<std::uint32_t>(idx.upto));
    }
    auto it = idx.buckets.find(key_hash);
    return it == idx.buckets.end() ? nullptr : &it->second;
  }

  std::uint64_t masked_hash(const Sym* r, std::uint32_t mask) const {
    std::uint64_t h = mask;
    for (std::size_t i = 0; i < arity_; ++i) {
      if (mask & (1u << i)) h = mix(h, r[i]);
    }
    return h;
  }

 private:
  static constexpr std::uint32_t kProbe = UINT32_MAX;

  const Sym* row_or_probe(std::uint32_t id) const { return id == kProbe ? probe_row_ : row(id); }

  struct RowHash {
    const Relation* rel;
    std::size_t operator()(std::uint32_t id) const {
      const Sym* r = rel->row_or_probe(id);
      std::uint64_t h = 0;
      for (std::size_t i = 0; i < rel->arity_; ++i) h = mix(h, r[i]);
      return h;
    }
  };
  struct RowEq {
    const Relation* rel;
    bool operator()(std::uint32_t a, std::uint32_t b) const {
      return std::equal(rel->row_or_probe(a), rel->row_or_probe(a) + rel->arity_,
                        rel->row_or_probe(b));
    }
  };
  struct Index {
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
    std::size_t upto = 0;
  };

  std::size_t arity_;
  std::size_t rows_ = 0;
  std::vector<Sym> data_;
  mutable const Sym* probe_row_ = nullptr;
  std::unordered_set<std::uint32_t, RowHash, RowEq> dedup_;
  std::unordered_map<std::uint32_t, Index> indexes_;
};

// ---------------------------------------------------------------------------
// Compiled rules

struct Term {
  enum Kind : std::uint8_t { Var, Const, Any } kind;
  std::uint32_t id;  // variable number or constant symbol
};

struct Literal {
  std::size_t pred;
  bool negated;
  std::vector<Term> args;
};

struct CRule {
  std::size_t head;
  std::vector<Term> head_args;
  std::vector<Literal> body;
  std::size_t nvars = 0;
};

enum class Range : std::uint8_t { Full, Delta };

// One literal of a join plan with its argument roles precomputed.
struct Step {
  std::size_t lit;
  std::size_t pred;
  bool negated;
  Range range;
  std::uint32_t mask = 0;
  std::vector<std::pair<std::size_t, Term>> key;  // bound positions, in order
  std::vector<std::pair<std::size_t, std::uint32_t>> binds;  // pos -> var
  std::vector<std::pair<std::size_t, std::size_t>> same;     // pos must equal pos
};

struct Plan {
  std::size_t rule;
  std::vector<Step> steps;
};

// Orders the literals of `r`: the delta literal (if any) first, then the other
// positive literals as written; each negated literal right after its last
// variable becomes bound.
Plan make_plan(const CRule& r, std::size_t rule_index, int delta_lit) {
  std::vector<std::size_t> order;
  if (delta_lit >= 0) order.push_back(static_cast<std::size_t>(delta_lit));
  for (std::size_t i = 0; i < r.body.size(); ++i) {
    if (!r.body[i].negated && static_cast<int>(i) != delta_lit) order.push_back(i);
  }
  std::vector<bool> bound(r.nvars, false);
  auto all_bound = [&](const Literal& l) {
    return std::all_of(l.args.begin(), l.args.end(),
                       [&](const Term& t) { return t.kind != Term::Var || bound[t.id]; });
  };
  Plan plan{rule_index, {}};
  std::vector<bool> placed(r.body.size(), false);
  auto place = [&](std::size_t li) {
    const Literal& l = r.body[li];
    Step s{li, l.pred, l.negated,
           static_cast<int>(li) == delta_lit ? Range::Delta : Range::Full, 0, {}, {}, {}};
    std::unordered_map<std::uint32_t, std::size_t> first_here;
    for (std::size_t p = 0; p < l.args.size(); ++p) {
      const Term& t = l.args[p];
      if (t.kind == Term::Const || (t.kind == Term::Var && bound[t.id])) {
        s.mask |= 1u << p;
        s.key.emplace_back(p, t);
      } else if (t.kind == Term::Var) {
        auto [it, fresh] = first_here.try_emplace(t.id, p);
        if (fresh) {
          s.binds.emplace_back(p, t.id);
        } else {
          s.same.emplace_back(p, it->second);
        }
      }
    }
    for (const auto& [p, v] : s.binds) bound[v] = true;
    placed[li] = true;
    plan.steps.push_back(std::move(s));
  };
  auto place_ready_negations = [&] {
    for (std::size_t i = 0; i < r.body.size(); ++i) {
      if (r.body[i].negated && !placed[i] && all_bound(r.body[i])) place(i);
    }
  };
  place_ready_negations();
  for (auto li : order) {
    place(li);
    place_ready_negations();
  }
  for (std::size_t i = 0; i < r.body.size(); ++i) {
    if (!placed[i]) place(i);  // unsafe negation; wildcards make it a partial probe
  }
  return plan;
}

struct Stratum {
  std::vector<std::size_t> preds;
  std::vector<std::size_t> rules;
  std::vector<Plan> init_plans;   // every rule, all literals full
  std::vector<Plan> delta_plans;  // one per (rule, recursive positive literal)
};

}  // namespace

struct RuleProgram::Impl {
  std::vector<Rule> source;
  std::vector<std::string> pred_names;
  std::map<std::string, std::size_t> pred_ids;
  std::map<std::string, std::size_t> arities;
  std::vector<bool> is_derived;
  std::vector<CRule> rules;
  std::vector<Stratum> strata;
  std::vector<std::set<std::string>> strata_names;
  std::vector<Value> constants;  // interned first, in order, on every evaluation

  std::size_t pred_id(const std::string& key, std::size_t arity) {
    auto [it, fresh] = pred_ids.try_emplace(key, pred_names.size());
    if (fresh) {
      pred_names.push_back(key);
      arities.emplace(key, arity);
      is_derived.push_back(false);
    } else if (arities.at(key) != arity) {
      throw RuntimeError(RuntimeErrorKind::ArityError,
                         "predicate " + key + " used with inconsistent arity");
    }
    return it->second;
  }

  void compile(std::vector<std::set<std::string>> strat) {
    std::unordered_map<Value, std::uint32_t, ValueHash> const_ids;
    auto term = [&](const RuleTerm& t, std::map<std::string, std::uint32_t>& vars) -> Term {
      if (const auto* v = std::get_if<LogicVar>(&t)) {
        auto [it, fresh] = vars.try_emplace(v->name, static_cast<std::uint32_t>(vars.size()));
        return Term{Term::Var, it->second};
      }
      if (const auto* c = std::get_if<Value>(&t)) {
        auto [it, fresh] = const_ids.try_emplace(*c, static_cast<std::uint32_t>(constants.size()));
        if (fresh) constants.push_back(*c);
        return Term{Term::Const, it->second};
      }
      return Term{Term::Any, 0};
    };
    for (const auto& r : source) {
      if (r.conclusion.args.size() > 32) {
        throw RuntimeError(RuntimeErrorKind::ArityError, "predicate arity above 32 is unsupported");
      }
      std::map<std::string, std::uint32_t> vars;
      CRule c;
      // Positive hypotheses first so conclusion variables get low numbers
      // in a consistent way; numbering is otherwise irrelevant.
      for (const auto& h : r.hypotheses) {
        Literal l{pred_id(h.atom.pred.key(), h.atom.args.size()), h.negated, {}};
        for (const auto& a : h.atom.args) l.args.push_back(term(a, vars));
        c.body.push_back(std::move(l));
      }
      c.head = pred_id(r.conclusion.pred.key(), r.conclusion.args.size());
      for (const auto& a : r.conclusion.args) c.head_args.push_back(term(a, vars));
      c.nvars = vars.size();
      is_derived[c.head] = true;
      rules.push_back(std::move(c));
    }
    strata_names = std::move(strat);
    for (const auto& names : strata_names) {
      Stratum s;
      std::set<std::size_t> members;
      for (const auto& n : names) members.insert(pred_ids.at(n));
      s.preds.assign(members.begin(), members.end());
      for (std::size_t i = 0; i < rules.size(); ++i) {
        if (!members.contains(rules[i].head)) continue;
        s.rules.push_back(i);
        s.init_plans.push_back(make_plan(rules[i], i, -1));
        for (std::size_t l = 0; l < rules[i].body.size(); ++l) {
          const auto& lit = rules[i].body[l];
          if (!lit.negated && members.contains(lit.pred)) {
            s.delta_plans.push_back(make_plan(rules[i], i, static_cast<int>(l)));
          }
        }
      }
      strata.push_back(std::move(s));
    }
  }
};

namespace {

// Evaluation state for one call: symbols and relations for every predicate.
class Evaluation {
 public:
  Evaluation(const RuleProgram::Impl& prog, EvalStats* stats) : prog_(prog), stats_(stats) {
    for (const auto& c : prog.constants) syms_.intern(c);
    for (const auto& name : prog.pred_names) {
      rels_.push_back(std::make_unique<Relation>(prog.arities.at(name)));
    }
    delta_lo_.assign(rels_.size(), 0);
    delta_hi_.assign(rels_.size(), 0);
  }

  void load(const FactStore& input) {
    std::vector<Sym> row;
    for (const auto& [key, tuples] : input) {
      auto it = prog_.pred_ids.find(key);
      if (it == prog_.pred_ids.end() || prog_.is_derived[it->second]) continue;
      Relation& rel = *rels_[it->second];
      for (const auto& t : tuples) {
        if (!t.is_tuple() || t.as_tuple().size() != rel.arity()) {
          throw RuntimeError(RuntimeErrorKind::ArityError,
                             "fact " + to_string(t) + " does not fit " + key + "/" +
                                 std::to_string(rel.arity()));
        }
        row.clear();
        for (const auto& c : t.as_tuple()) row.push_back(syms_.intern(c));
        rel.insert(row.data());
      }
    }
  }

  void run(const Stratum& s, Strategy strategy) {
    std::vector<std::vector<Sym>> out(rels_.size());
    for (const auto& plan : s.init_plans) execute(plan, out);
    if (stats_) ++stats_->rounds;
    bool changed = absorb(s, out);
    while (changed) {
      if (strategy == Strategy::SemiNaive) {
        for (const auto& plan : s.delta_plans) execute(plan, out);
      } else {
        for (const auto& plan : s.init_plans) execute(plan, out);
      }
      if (stats_) ++stats_->rounds;
      changed = absorb(s, out);
    }
  }

  FactStore result(const FactStore& input) const {
    FactStore store = input;
    for (std::size_t p = 0; p < rels_.size(); ++p) {
      if (!prog_.is_derived[p]) continue;
      const Relation& rel = *rels_[p];
      std::vector<Value> tuples;
      tuples.reserve(rel.size());
      for (std::size_t i = 0; i < rel.size(); ++i) {
        const Sym* r = rel.row(i);
        std::vector<Value> comps;
        comps.reserve(rel.arity());
        for (std::size_t k = 0; k < rel.arity(); ++k) comps.push_back(syms_.value(r[k]));
        tuples.push_back(Value::tuple(std::move(comps)));
      }
      store[prog_.pred_names[p]] = std::move(tuples);
    }
    return store;
  }

 private:
  // Moves buffered conclusions into the stratum's relations; the rows that
  // were actually new become the next delta.
  bool absorb(const Stratum& s, std::vector<std::vector<Sym>>& out) {
    bool changed = false;
    for (auto p : s.preds) {
      Relation& rel = *rels_[p];
      delta_lo_[p] = rel.size();
      auto& buf = out[p];
      std::size_t a = rel.arity();
      if (a == 0) {
        if (!buf.empty() || zero_ary_hit_[p]) {
          std::vector<Sym> none;
          rel.insert(none.data());
        }
        zero_ary_hit_.erase(p);
      } else {
        for (std::size_t i = 0; i + a <= buf.size(); i += a) rel.insert(buf.data() + i);
      }
      buf.clear();
      delta_hi_[p] = rel.size();
      if (delta_hi_[p] > delta_lo_[p]) changed = true;
    }
    return changed;
  }

  void execute(const Plan& plan, std::vector<std::vector<Sym>>& out) {
    env_.assign(prog_.rules[plan.rule].nvars, 0);
    step(plan, 0, out);
  }

  void emit(const CRule& r, std::vector<std::vector<Sym>>& out) {
    if (stats_) ++stats_->derivations;
    if (r.head_args.empty()) {
      zero_ary_hit_[r.head] = true;
      return;
    }
    auto& buf = out[r.head];
    for (const auto& t : r.head_args) buf.push_back(t.kind == Term::Var ? env_[t.id] : t.id);
  }

  Sym key_value(const Term& t) const { return t.kind == Term::Var ? env_[t.id] : t.id; }

  bool matches(const Step& s, const Sym* row) const {
    for (const auto& [p, t] : s.key) {
      if (row[p] != key_value(t)) return false;
    }
    for (const auto& [p, q] : s.same) {
      if (row[p] != row[q]) return false;
    }
    return true;
  }

  void step(const Plan& plan, std::size_t i, std::vector<std::vector<Sym>>& out) {
    const CRule& rule = prog_.rules[plan.rule];
    if (i == plan.steps.size()) {
      emit(rule, out);
      return;
    }
    const Step& s = plan.steps[i];
    Relation& rel = *rels_[s.pred];
    std::size_t lo = s.range == Range::Delta ? delta_lo_[s.pred] : 0;
    std::size_t hi = s.range == Range::Delta ? delta_hi_[s.pred] : rel.size();
    const std::uint32_t full = rel.arity() == 32 ? UINT32_MAX : (1u << rel.arity()) - 1;

    auto visit = [&](std::size_t id) -> bool {  // returns true to stop (negation found)
      const Sym* row = rel.row(id);
      if (!matches(s, row)) return false;
      if (s.negated) return true;
      for (const auto& [p, v] : s.binds) env_[v] = row[p];
      step(plan, i + 1, out);
      return false;
    };

    bool found = false;
    if (s.mask == full && rel.arity() > 0) {
      key_.clear();
      for (const auto& [p, t] : s.key) key_.push_back(key_value(t));
      auto id = rel.find(key_.data());
      if (id >= 0 && static_cast<std::size_t>(id) >= lo && static_cast<std::size_t>(id) < hi) {
        found = visit(static_cast<std::size_t>(id));
      }
    } else if (s.mask == 0) {
      for (std::size_t id = lo; id < hi && !found; ++id) found = visit(id);
    } else {
      std::uint64_t h = s.mask;
      for (const auto& [p, t] : s.key) h = mix(h, key_value(t));
      const auto* ids = rel.probe(s.mask, h);
      if (ids) {
        auto it = std::lower_bound(ids->begin(), ids->end(), static_cast<std::uint32_t>(lo));
        // The index may grow while we recurse only in other relations' steps;
        // rows are never added mid-round, so iterating by position is safe.
        for (std::size_t k = static_cast<std::size_t>(it - ids->begin());
             k < ids->size() && (*ids)[k] < hi && !found; ++k) {
          found = visit((*ids)[k]);
        }
      }
    }
    if (s.negated && !found) step(plan, i + 1, out);
  }

  const RuleProgram::Impl& prog_;
  EvalStats* stats_;
  Symbols syms_;
  std::vector<std::unique_ptr<Relation>> rels_;
  std::vector<std::size_t> delta_lo_, delta_hi_;
  std::vector<Sym> env_;
  std::vector<Sym> key_;
  std::map<std::size_t, bool> zero_ary_hit_;
};

}  // namespace

RuleProgram::RuleProgram(std::vector<Rule> rules) : impl_(std::make_unique<Impl>()) {
  auto strat = stratify(rules);
  impl_->source = std::move(rules);
  impl_->compile(std::move(strat));
}

RuleProgram::~RuleProgram() = default;
RuleProgram::RuleProgram(RuleProgram&&) noexcept = default;
RuleProgram& RuleProgram::operator=(RuleProgram&&) noexcept = default;

const std::vector<std::set<std::string>>& RuleProgram::strata() const {
  return impl_->strata_names;
}
const std::map<std::string, std::size_t>& RuleProgram::arities() const { return impl_->arities; }

FactStore RuleProgram::evaluate(const FactStore& input, Strategy strategy, EvalStats* stats) const {
  Evaluation ev(*impl_, stats);
  ev.load(input);
  for (const auto& s : impl_->strata) ev.run(s, strategy);
  return ev.result(input);
}

FactStore eval_rules(const std::vector<Rule>& rules, const FactStore& input, Strategy strategy) {
  return RuleProgram(rules).evaluate(input, strategy);
}

namespace {

FactStore eval_one_stratum(const std::vector<Rule>& rules, const FactStore& established,
                           Strategy strategy) {
  RuleProgram prog(rules);
  if (prog.strata().size() > 1) {
    throw RuntimeError(RuntimeErrorKind::StratificationError,
                       "rules negate a predicate defined in the same stratum");
  }
  return prog.evaluate(established, strategy);
}

}  // namespace

FactStore eval_stratum_seminaive(const std::vector<Rule>& rules, const FactStore& established) {
  return eval_one_stratum(rules, established, Strategy::SemiNaive);
}

FactStore eval_stratum_naive(const std::vector<Rule>& rules, const FactStore& established) {
  return eval_one_stratum(rules, established, Strategy::Naive);
}

std::vector<Value> answer_query(const QueryPattern& q, const FactStore& facts) {
  auto it = facts.find(q.predicate);
  if (it == facts.end()) {
    throw RuntimeError(RuntimeErrorKind::UndefinedPredicate,
                       "predicate " + q.predicate + " is undefined");
  }
  // Slot of each argument in the projected tuple; -1 for constants.
  std::vector<int> slot(q.args.size(), -1);
  std::map<std::string, int> var_slot;
  int nslots = 0;
  for (std::size_t i = 0; i < q.args.size(); ++i) {
    const auto& a = q.args[i].node;
    if (const auto* v = std::get_if<QueryArg::Var>(&a)) {
      auto [vit, fresh] = var_slot.try_emplace(v->name, nslots);
      if (fresh) ++nslots;
      slot[i] = vit->second;
    } else if (std::holds_alternative<QueryArg::Wildcard>(a)) {
      slot[i] = nslots++;
    }
  }
  std::vector<Value> out;
  std::unordered_set<Value, ValueHash> seen;
  std::vector<Value> proj(static_cast<std::size_t>(nslots));
  std::vector<bool> set(static_cast<std::size_t>(nslots));
  for (const auto& t : it->second) {
    auto comps = t.as_tuple();
    if (comps.size() != q.args.size()) {
      throw RuntimeError(RuntimeErrorKind::ArityError,
                         "query on " + q.predicate + " has " + std::to_string(q.args.size()) +
                             " arguments, facts have " + std::to_string(comps.size()));
    }
    std::fill(set.begin(), set.end(), false);
    bool ok = true;
    for (std::size_t i = 0; i < comps.size() && ok; ++i) {
      if (slot[i] < 0) {
        ok = comps[i] == std::get<QueryArg::Const>(q.args[i].node).value;
        continue;
      }
      auto s = static_cast<std::size_t>(slot[i]);
      if (set[s]) {
        ok = proj[s] == comps[i];
      } else {
        proj[s] = comps[i];
        set[s] = true;
      }
    }
    if (!ok) continue;
    Value v = Value::tuple(proj);
    if (seen.insert(v).second) out.push_back(std::move(v));
  }
  return out;
}

}  // namespace alda::datalog
