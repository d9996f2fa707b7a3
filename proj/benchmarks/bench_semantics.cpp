#include <benchmark/benchmark.h>

#include "derivelog/formula.hpp"
#include "derivelog/search.hpp"
#include "derivelog/semantics.hpp"
#include "derivelog/spaces.hpp"
#include "derivelog/transforms.hpp"

namespace {

using namespace derivelog;

void BM_TruthSet(benchmark::State& state) {
  const Model m = random_model(FrameClass::WK4C, static_cast<std::size_t>(state.range(0)), 7);
  const Formula f = parse("[](X p -> <>(q & X []~p)) & <>[]<>p");
  for (auto _ : state) benchmark::DoNotOptimize(truth_set(m, f));
}
BENCHMARK(BM_TruthSet)->RangeMultiplier(4)->Range(4, 64);

void BM_CompiledFormula(benchmark::State& state) {
  const Model m = random_model(FrameClass::WK4C, static_cast<std::size_t>(state.range(0)), 7);
  const CompiledFormula cf(parse("[](X p -> <>(q & X []~p)) & <>[]<>p"), {"p", "q"});
  const std::vector<PointSet> values{m.value("p"), m.value("q")};
  for (auto _ : state) benchmark::DoNotOptimize(cf.evaluate(m.space(), m.function(), values));
}
BENCHMARK(BM_CompiledFormula)->RangeMultiplier(4)->Range(4, 64);

void BM_TangledDerivative(benchmark::State& state) {
  const Model m = random_model(FrameClass::WK4C, static_cast<std::size_t>(state.range(0)), 11);
  const std::vector<PointSet> family{m.value("p"), m.value("q"), m.space().all()};
  for (auto _ : state) benchmark::DoNotOptimize(tangled_derivative(m.space(), family));
}
BENCHMARK(BM_TangledDerivative)->RangeMultiplier(4)->Range(4, 64);

void BM_Unwind(benchmark::State& state) {
  const Model m = random_model(FrameClass::GLC, static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(unwind(m));
}
BENCHMARK(BM_Unwind)->DenseRange(3, 6);

}  // namespace
