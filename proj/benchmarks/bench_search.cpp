#include <benchmark/benchmark.h>

#include "derivelog/formula.hpp"
#include "derivelog/search.hpp"

namespace {

using namespace derivelog;

void BM_EnumerateFrames(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cls = static_cast<FrameClass>(state.range(1));
  std::size_t count = 0;
  for (auto _ : state) {
    count = 0;
    for_each_frame(n, cls, {}, [&](const DynamicFrame&) {
      ++count;
      return true;
    });
    benchmark::DoNotOptimize(count);
  }
  state.counters["frames"] = static_cast<double>(count);
}
BENCHMARK(BM_EnumerateFrames)
    ->Args({3, static_cast<int>(FrameClass::WK4C)})
    ->Args({3, static_cast<int>(FrameClass::GLC)})
    ->Args({4, static_cast<int>(FrameClass::GLC)})
    ->Args({4, static_cast<int>(FrameClass::K4H)})
    ->Unit(benchmark::kMillisecond);

void BM_ValidAtBound(benchmark::State& state) {
  const Formula f = parse("[]([]p -> p) -> []p");
  SearchBudget b;
  b.max_worlds = static_cast<std::size_t>(state.range(0));
  b.prune_isomorphic = true;
  for (auto _ : state) benchmark::DoNotOptimize(valid_at_bound(f, FrameClass::GLC, b));
}
BENCHMARK(BM_ValidAtBound)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

void BM_SatCounterModel(benchmark::State& state) {
  const Formula f = parse("~([]p -> [][]p)");
  SearchBudget b;
  b.max_worlds = 4;
  for (auto _ : state) benchmark::DoNotOptimize(sat_search(f, FrameClass::WK4C, b));
}
BENCHMARK(BM_SatCounterModel)->Unit(benchmark::kMicrosecond);

void BM_StorySearch(benchmark::State& state) {
  const Formula f = parse("p & X ~p & X X p & <>X q");
  SearchBudget b;
  b.max_worlds = 4;
  for (auto _ : state) benchmark::DoNotOptimize(story_search(f, FrameClass::K4C, b));
}
BENCHMARK(BM_StorySearch)->Unit(benchmark::kMicrosecond);

}  // namespace
