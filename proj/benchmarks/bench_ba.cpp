#include <benchmark/benchmark.h>

#include "ba_fixtures.hpp"

namespace {

void BM_PoseOnlySolve(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto c = pixmotion::testing::make_pose_only_case(rng, static_cast<int>(state.range(0)),
                                                         static_cast<int>(state.range(0) / 4));
  for (auto _ : state) benchmark::DoNotOptimize(pixmotion::solve_weighted_ba(c.problem));
}
BENCHMARK(BM_PoseOnlySolve)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
