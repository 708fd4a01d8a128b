#include "alda/bench.hpp"

#include <chrono>
#include <random>

#include "alda/parser.hpp"

namespace alda::bench {

namespace {

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Value pair(Value a, Value b) { return Value::tuple({std::move(a), std::move(b)}); }
Value name(char prefix, std::size_t i) { return Value::string(prefix + std::to_string(i)); }

}  // namespace

std::vector<Value> make_graph(const TcParams& p) {
  std::vector<Value> edges;
  auto n = static_cast<std::int64_t>(p.n);
  if (p.graph == GraphKind::Cycle) {
    for (std::int64_t i = 0; i < n; ++i) {
      edges.push_back(pair(Value::integer(i), Value::integer((i + 1) % n)));
    }
    return edges;
  }
  std::mt19937_64 rng(p.seed);
  std::bernoulli_distribution coin(p.density);
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      if (coin(rng)) edges.push_back(pair(Value::integer(i), Value::integer(j)));
    }
  }
  return edges;
}

TcResult run_tc(const TcParams& p) {
  TcResult r;
  auto edges = make_graph(p);
  r.edges = edges.size();
  auto t0 = std::chrono::steady_clock::now();
  auto cp = compile(parse_program(programs::tc_program(p.reversed)), {"edge"});
  RunOptions opt;
  opt.global_sets.emplace_back("edge", std::move(edges));
  Interpreter it(*cp, std::move(opt));
  it.run();
  r.closure = static_cast<std::size_t>(it.global("result")->as_int());
  r.seconds = since(t0);
  return r;
}

RbacScenario make_rbac_scenario(const RbacParams& p) {
  RbacScenario s;
  std::mt19937_64 rng(p.seed);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  for (std::size_t i = 0; i < p.roles; ++i) s.roles.push_back(name('r', i));
  for (std::size_t i = 0; i < p.users; ++i) s.users.push_back(name('u', i));
  // A forest over roles: each role below the first few has a senior role.
  for (std::size_t i = 1; i < p.roles; ++i) {
    if (pick(8) != 0) s.rh.push_back(pair(name('r', pick(i)), name('r', i)));
  }
  for (std::size_t i = 0; i < p.users; ++i) {
    s.ur.push_back(pair(name('u', i), name('r', pick(p.roles))));
    if (pick(4) == 0) s.ur.push_back(pair(name('u', i), name('r', pick(p.roles))));
  }
  for (std::size_t k = 0; k < p.updates; ++k) {
    bool ur = pick(2) == 0;
    Value x, y;
    if (ur) {
      x = name('u', pick(p.users));
      y = name('r', pick(p.roles));
    } else {
      // Senior always has the smaller index, so the hierarchy stays acyclic.
      std::size_t a = pick(p.roles), b = pick(p.roles);
      if (a > b) std::swap(a, b);
      if (a == b) b = (b + 1) % p.roles;
      x = name('r', std::min(a, b));
      y = name('r', std::max(a, b));
    }
    s.updates.push_back(Value::tuple({Value::integer(static_cast<std::int64_t>(k)),
                                      Value::string(ur ? "ur" : "rh"), x, y,
                                      name('r', pick(p.roles))}));
  }
  return s;
}

RbacVariantResult run_rbac_variant(programs::RbacVariant v, const RbacScenario& s,
                                   MaintenancePolicy policy) {
  RbacVariantResult r{v, 0, {}};
  auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> inputs{"roles_in", "users_in", "ur_in", "rh_in", "updates_in"};
  auto cp = compile(parse_program(programs::rbac_classes(v) + "\n" + programs::rbac_driver()),
                    inputs);
  RunOptions opt;
  opt.policy = policy;
  opt.global_sets = {{"roles_in", s.roles}, {"users_in", s.users}, {"ur_in", s.ur},
                     {"rh_in", s.rh},       {"updates_in", s.updates}};
  Interpreter it(*cp, std::move(opt));
  it.run();
  r.answers = it.set_elements(*it.global("answers"));
  r.seconds = since(t0);
  return r;
}

RbacResult run_rbac(const RbacParams& p, MaintenancePolicy policy) {
  RbacResult out;
  auto s = make_rbac_scenario(p);
  for (auto v : {programs::RbacVariant::AllLocal, programs::RbacVariant::NonLocal,
                 programs::RbacVariant::Union}) {
    out.variants.push_back(run_rbac_variant(v, s, policy));
    out.identical = out.identical && out.variants.back().answers == out.variants.front().answers;
  }
  return out;
}

}  // namespace alda::bench
