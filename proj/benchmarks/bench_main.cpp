#include <benchmark/benchmark.h>

#include "formderiv/dataset.hpp"
#include "formderiv/derivation.hpp"
#include "formderiv/encoding.hpp"
#include "formderiv/pattern.hpp"
#include "formderiv/rl.hpp"

using namespace formderiv;
using namespace formderiv::build;

namespace {

// Balanced Plus tree with 2^depth leaves.
Formula balanced(int depth, int& counter) {
  if (depth == 0) return Sym("s" + std::to_string(counter++));
  Formula l = balanced(depth - 1, counter);
  Formula r = balanced(depth - 1, counter);
  return Plus(l, r);
}

void BM_FindAll(benchmark::State& state) {
  int counter = 0;
  const Formula f = balanced(static_cast<int>(state.range(0)), counter);
  const Formula tpl = Plus(Sym("a"), Sym("b"));
  for (auto _ : state) benchmark::DoNotOptimize(find_all(f, tpl, {"a", "b"}));
  state.SetComplexityN(static_cast<long>(f.size()));
}
BENCHMARK(BM_FindAll)->DenseRange(2, 8, 2)->Complexity();

void BM_Encode(benchmark::State& state) {
  int counter = 0;
  const Formula f = balanced(static_cast<int>(state.range(0)), counter);
  const SymbolTable table = SymbolTable::canonical(4096);
  for (auto _ : state) benchmark::DoNotOptimize(encode(f, table));
}
BENCHMARK(BM_Encode)->DenseRange(2, 8, 2);

void BM_Distance(benchmark::State& state) {
  const SymbolTable table = SymbolTable::canonical();
  const auto a = encode(pm149_equation(), table);
  const auto b = encode(pm149_standard_form(), table);
  for (auto _ : state) benchmark::DoNotOptimize(distance(a, b));
}
BENCHMARK(BM_Distance);

void BM_BfsPm149(benchmark::State& state) {
  const RuleSet rules = base_rule_set();
  const Formula start = pm149_standard_form();
  const GoalSpec goal = pm149_goal();
  for (auto _ : state) benchmark::DoNotOptimize(bfs_oracle(start, goal, rules, 12));
}
BENCHMARK(BM_BfsPm149)->Unit(benchmark::kMillisecond);

void BM_PolicyForward(benchmark::State& state) {
  const SymbolTable table = SymbolTable::canonical();
  const auto s = encode(pm149_standard_form(), table);
  const PolicyModel m = PolicyModel::random(s.values.size(), static_cast<std::size_t>(state.range(0)),
                                            base_rule_set().size(), 1, 1.0 / 17);
  for (auto _ : state) benchmark::DoNotOptimize(m.forward(s));
}
BENCHMARK(BM_PolicyForward)->Arg(32)->Arg(64)->Arg(128);

void BM_GenCorpus(benchmark::State& state) {
  const RuleSet rules = base_rule_set();
  GenOptions opt;
  opt.count = static_cast<std::size_t>(state.range(0));
  opt.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(build_corpus(opt, rules));
}
BENCHMARK(BM_GenCorpus)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
