#include <benchmark/benchmark.h>

#include "pixmotion/synthetic.hpp"
#include "pixmotion/view_synthesis.hpp"

namespace {

void BM_SynthesizeView(benchmark::State& state) {
  const pixmotion::SyntheticRenderer r(pixmotion::SyntheticScene::desk_preset());
  const auto src = r.render(12, true);
  const auto rel = r.camera_pose(10).inverse() * r.camera_pose(12);
  const auto& k = r.scene().intrinsics;
  for (auto _ : state) benchmark::DoNotOptimize(pixmotion::synthesize_view(src.rgb, src.depth, rel, k));
  state.SetItemsProcessed(state.iterations() * k.width * k.height);
}
BENCHMARK(BM_SynthesizeView);

}  // namespace
