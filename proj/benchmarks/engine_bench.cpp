// Transitive closure through the language front end, the bare engine under
// both strategies, and the three RBAC variants.
#include <benchmark/benchmark.h>

#include "alda/bench.hpp"
#include "alda/parser.hpp"
#include "alda/runtime.hpp"

namespace {

using namespace alda;

void BM_TcCycle(benchmark::State& state) {
  bench::TcParams p;
  p.n = static_cast<std::size_t>(state.range(0));
  p.reversed = state.range(1) != 0;
  std::size_t closure = 0;
  for (auto _ : state) closure = bench::run_tc(p).closure;
  state.counters["closure"] = static_cast<double>(closure);
}
BENCHMARK(BM_TcCycle)
    ->ArgsProduct({{50, 100, 200, 500}, {0, 1}})
    ->ArgNames({"n", "rev"})
    ->Unit(benchmark::kMillisecond);

void BM_TcRandom(benchmark::State& state) {
  bench::TcParams p;
  p.n = static_cast<std::size_t>(state.range(0));
  p.graph = bench::GraphKind::Random;
  p.density = 0.02;
  for (auto _ : state) benchmark::DoNotOptimize(bench::run_tc(p).closure);
}
BENCHMARK(BM_TcRandom)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_EngineStrategy(benchmark::State& state) {
  auto cp = compile(parse_program(
      "rules trans_rs:\n"
      "  path(x,y) if edge(x,y)\n"
      "  path(x,y) if edge(x,z), path(z,y)\n"));
  const auto& rules = cp->rulesets.begin()->second.info.rules;
  bench::TcParams p;
  p.n = static_cast<std::size_t>(state.range(0));
  datalog::FactStore base{{"edge", bench::make_graph(p)}};
  auto strategy = state.range(1) ? datalog::Strategy::Naive : datalog::Strategy::SemiNaive;
  for (auto _ : state) benchmark::DoNotOptimize(datalog::eval_rules(rules, base, strategy));
}
BENCHMARK(BM_EngineStrategy)
    ->ArgsProduct({{25, 50, 100}, {0, 1}})
    ->ArgNames({"n", "naive"})
    ->Unit(benchmark::kMillisecond);

void BM_Rbac(benchmark::State& state) {
  bench::RbacParams p;
  p.users = 200;
  p.roles = 20;
  p.updates = 20;
  auto scenario = bench::make_rbac_scenario(p);
  auto v = static_cast<programs::RbacVariant>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bench::run_rbac_variant(v, scenario).answers.size());
}
BENCHMARK(BM_Rbac)->DenseRange(0, 2)->ArgName("variant")->Unit(benchmark::kMillisecond);

}  // namespace
