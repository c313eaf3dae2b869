#include <benchmark/benchmark.h>

#include <random>

#include "pixmotion/movable.hpp"
#include "test_support.hpp"

namespace {

void BM_MovableProbability(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const int h = w * 3 / 4;
  std::mt19937_64 rng(1);
  const auto a = pixmotion::testing::random_image(w, h, rng);
  const auto b = pixmotion::testing::random_image(w, h, rng);
  for (auto _ : state) benchmark::DoNotOptimize(pixmotion::movable_probability(a, b));
  state.SetItemsProcessed(state.iterations() * w * h);
}
BENCHMARK(BM_MovableProbability)->Arg(160)->Arg(640);

}  // namespace
