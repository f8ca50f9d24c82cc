#include <benchmark/benchmark.h>

#include <vector>

#include "dasflow/lpr.hpp"
#include "dasflow/online_vbs.hpp"
#include "dasflow/synth.hpp"

namespace {

using namespace dasflow;

StreamConfig bench_config() {
  StreamConfig c;
  c.points_per_frame = 200;
  c.point_spacing = 1.6;
  c.allow_negative = true;
  return c;
}

MeanScenario bench_scenario() {
  MeanScenario s;
  s.mean.terms = {ConstantTerm{3.0}, SineTerm{1.0, 160.0, 0.0}, BumpTerm{1.5, 80.0, 8.0}};
  s.noise_sigma = 0.2;
  s.seed = 11;
  return s;
}

void BM_FrameStats(benchmark::State& state) {
  const auto config = bench_config();
  const auto frame = generate_frame(bench_scenario(), config, 0);
  const auto grid = regular_grid(config, 100);
  const double h = static_cast<double>(state.range(0)) * config.point_spacing;
  for (auto _ : state) benchmark::DoNotOptimize(frame_stats(frame, grid, h));
}
BENCHMARK(BM_FrameStats)->Arg(2)->Arg(8)->Arg(32);

// One ingest with the state already holding `range(0)` frames.
void BM_OnlineIngest(benchmark::State& state) {
  const auto config = bench_config();
  const auto scenario = bench_scenario();
  const auto grid = regular_grid(config, 100);
  const auto warm = static_cast<std::size_t>(state.range(0));
  OnlineConfig oc;
  OnlineState base = OnlineState::init(grid, oc, generate_frame(scenario, config, 0));
  for (std::size_t k = 0; k < warm; ++k) base.ingest(generate_frame(scenario, config, k));
  const auto next = generate_frame(scenario, config, warm);
  for (auto _ : state) {
    state.PauseTiming();
    OnlineState s = base;
    state.ResumeTiming();
    s.ingest(next);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_OnlineIngest)->Arg(9)->Arg(99)->Arg(999);

void BM_QueryMean(benchmark::State& state) {
  const auto config = bench_config();
  const auto grid = regular_grid(config, static_cast<std::size_t>(state.range(0)));
  OnlineState s = OnlineState::init(grid, OnlineConfig{}, generate_frame(bench_scenario(), config, 0));
  for (std::size_t k = 0; k < 20; ++k) s.ingest(generate_frame(bench_scenario(), config, k));
  for (auto _ : state) benchmark::DoNotOptimize(s.query_mean());
}
BENCHMARK(BM_QueryMean)->Arg(100)->Arg(800);

void BM_BatchEstimate(benchmark::State& state) {
  const auto config = bench_config();
  const auto sample = generate_stream(bench_scenario(), config, static_cast<std::size_t>(state.range(0)));
  const auto grid = regular_grid(config, 100);
  for (auto _ : state) benchmark::DoNotOptimize(batch_estimate(sample.frames, grid, 8.0));
}
BENCHMARK(BM_BatchEstimate)->Arg(10)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
