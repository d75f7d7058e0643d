#include <random>

#include <benchmark/benchmark.h>

#include "zsmat/association.hpp"
#include "zsmat/metrics.hpp"
#include "zsmat/oracle.hpp"
#include "zsmat/pipeline.hpp"
#include "zsmat/threshold.hpp"
#include "zsmat/tracker.hpp"

using namespace zsmat;

namespace {

void BM_Hungarian(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ScoreMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m(i, j) = u(rng);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(hungarian_match(m, 0.1));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Hungarian)->RangeMultiplier(2)->Range(4, 128)->Complexity();

void BM_MaskIou(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto a = BitMask::from_box(BBox{0.1 * side, 0.1 * side, 0.5 * side, 0.5 * side}, side, side);
  const auto b = BitMask::from_box(BBox{0.3 * side, 0.2 * side, 0.5 * side, 0.6 * side}, side, side);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mask_iou(a, b));
  }
}
BENCHMARK(BM_MaskIou)->Arg(64)->Arg(256)->Arg(1024);

void BM_MaskOr(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto a = BitMask::from_box(BBox{0.1 * side, 0.1 * side, 0.5 * side, 0.5 * side}, side, side);
  const auto b = BitMask::from_box(BBox{0.3 * side, 0.2 * side, 0.5 * side, 0.6 * side}, side, side);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mask_or(a, b));
  }
}
BENCHMARK(BM_MaskOr)->Arg(64)->Arg(256)->Arg(1024);

void BM_AdaptiveThreshold(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> lo(0.25, 0.06), hi(0.75, 0.06);
  std::vector<double> s(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::clamp(i % 2 ? hi(rng) : lo(rng), 0.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(adaptive_threshold(s, ThresholdConfig{}));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AdaptiveThreshold)->RangeMultiplier(4)->Range(256, 65536)->Complexity();

void BM_TrackerStepCrowded(benchmark::State& state) {
  const auto scenario = generate(crowded_scenario(1));
  auto world = std::make_shared<const World>(scenario.world);
  const auto& c = scenario.world.config;
  for (auto _ : state) {
    OracleSegmenter seg(world);
    seg.open(SequenceInfo{c.name, c.width, c.height, c.frames});
    Tracker tracker(TrackerConfig{}, seg, c.width, c.height);
    for (int f = 0; f < c.frames; ++f) {
      benchmark::DoNotOptimize(tracker.step(f, scenario.detections[static_cast<std::size_t>(f)]));
    }
  }
  state.SetItemsProcessed(state.iterations() * c.frames);
}
BENCHMARK(BM_TrackerStepCrowded)->Unit(benchmark::kMillisecond);

void BM_EvaluateCrowded(benchmark::State& state) {
  const auto scenario = generate(crowded_scenario(1));
  const auto run = run_scenario(scenario, RunConfig{});
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(scenario.ground_truth, run.predictions));
  }
}
BENCHMARK(BM_EvaluateCrowded)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
