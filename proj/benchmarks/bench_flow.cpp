#include <benchmark/benchmark.h>

#include "pixmotion/flow.hpp"
#include "pixmotion/synthetic.hpp"

namespace {

void BM_BaselineFlow(benchmark::State& state) {
  const pixmotion::SyntheticRenderer r(pixmotion::SyntheticScene::desk_preset());
  const auto a = r.render(10, true);
  const auto b = r.render(12, true);
  for (auto _ : state) benchmark::DoNotOptimize(pixmotion::baseline_flow(a.rgb, b.rgb));
}
BENCHMARK(BM_BaselineFlow)->Unit(benchmark::kMillisecond);

}  // namespace
