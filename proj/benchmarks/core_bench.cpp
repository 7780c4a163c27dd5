#include <memory>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "mftiq/flow.hpp"
#include "mftiq/providers.hpp"
#include "mftiq/quality.hpp"
#include "mftiq/synth.hpp"
#include "mftiq/tracker.hpp"

using namespace mftiq;

namespace {

FlowField random_flow(int w, int h, std::uint32_t seed, float spread) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(-spread, spread);
  FlowField f(w, h);
  for (auto& v : f.pixels()) v = {u(rng), u(rng)};
  return f;
}

synth::SceneSpec bench_scene(int size, int frames) {
  synth::SceneSpec s;
  s.resolution = {size, size};
  s.frame_count = frames;
  s.background = {3, 4};
  s.camera_motion = {0.5, 0.25};
  synth::LayerSpec layer;
  layer.width = size / 3.0;
  layer.height = size / 4.0;
  layer.texture = {9, 3};
  layer.keyframes = {{1, {size * 0.3, size * 0.5, 0, 1}}, {frames, {size * 0.7, size * 0.4, 0.3, 1}}};
  s.layers.push_back(layer);
  return s;
}

void BM_ChainFlows(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const FlowField a = random_flow(n, n, 1, 3), b = random_flow(n, n, 2, 3);
  for (auto _ : state) benchmark::DoNotOptimize(chain_flows(a, b));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_ChainFlows)->Arg(128)->Arg(512);

void BM_Select(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937 rng(4);
  std::uniform_real_distribution<float> cost(0, 31), occ(0, 1);
  std::vector<ChainCandidate> candidates;
  for (int d : {1, 2, 4, 8, 16, 32, kDirectDelta}) {
    ChainCandidate c{d, random_flow(n, n, static_cast<std::uint32_t>(d + 10), 8), CostMap(n, n), OcclusionMap(n, n)};
    for (auto& e : c.cost.pixels()) e = cost(rng);
    for (auto& o : c.occlusion.pixels()) o = occ(rng);
    candidates.push_back(std::move(c));
  }
  TrackerConfig cfg;
  cfg.mode = state.range(1) ? SelectionMode::HardExclusion : SelectionMode::SoftPenalty;
  for (auto _ : state) benchmark::DoNotOptimize(select(candidates, cfg));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_Select)->Args({128, 0})->Args({512, 0})->Args({512, 1});

void BM_ClassicalFlow(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto seq = synth::generate_sequence(bench_scene(n, 2), 1);
  for (auto _ : state) benchmark::DoNotOptimize(classical_flow(seq.frame(1), seq.frame(2)));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_ClassicalFlow)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ClassicalQuality(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto seq = synth::generate_sequence(bench_scene(n, 2), 1);
  const FlowField chain = synth::gt_flow(seq, 1, 2).flow;
  for (auto _ : state) benchmark::DoNotOptimize(quality::classical_estimate(chain, seq.frame(1), seq.frame(2)));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_ClassicalQuality)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

// One step per iteration with the ground-truth provider and oracle.
void BM_TrackerStepOracle(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  constexpr int kFrames = 40;
  const auto seq = synth::generate_sequence(bench_scene(n, kFrames), 1);
  auto provider = std::make_shared<SyntheticProvider>(seq);
  auto oracle = std::make_shared<quality::GroundTruthOracle>(seq);
  auto tracker = std::make_unique<Tracker>(TrackerConfig{}, provider, oracle);
  int t = 0;
  for (auto _ : state) {
    if (t == kFrames) {
      state.PauseTiming();
      tracker = std::make_unique<Tracker>(TrackerConfig{}, provider, oracle);
      t = 0;
      state.ResumeTiming();
    }
    ++t;
    benchmark::DoNotOptimize(tracker->step(t, seq.frame(t)));
  }
}
BENCHMARK(BM_TrackerStepOracle)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
