#include <benchmark/benchmark.h>

#include "wlra/background.hpp"
#include "wlra/ghs.hpp"
#include "wlra/metrics.hpp"
#include "wlra/synth.hpp"
#include "wlra/wlr.hpp"

#include <random>

using namespace wlra;

namespace {

Matrix randn(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = dist(rng);
  }
  return out;
}

void BM_HardThreshold(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const Index n = state.range(0);
  const Matrix a = randn(n, n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hard_threshold(a, n / 4));
  }
}
BENCHMARK(BM_HardThreshold)->Arg(64)->Arg(128)->Arg(256);

void BM_SvtShrink(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const Matrix a = randn(state.range(0), 50, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(svt_shrink(a, 5.0));
  }
}
BENCHMARK(BM_SvtShrink)->Arg(1000)->Arg(5000);

void BM_SolveIteration(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const Index m = state.range(0);
  const Index k = 10, n2 = 50, r = 11;
  const Matrix a1 = randn(m, k, rng);
  const Matrix a2 = randn(m, n2, rng);
  const BlockWeight w = random_weight(m, k, 500.0, 1000.0, rng);
  for (auto _ : state) {
    SolveOptions opts;
    opts.max_iter = 1;
    opts.eps = 1e-30;
    benchmark::DoNotOptimize(solve(a1, a2, w, r, opts));
  }
}
BENCHMARK(BM_SolveIteration)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_BatchPipeline(benchmark::State& state) {
  SynthSpec spec;
  spec.height = 48;
  spec.width = 64;
  spec.n_frames = 60;
  spec.kind = BackgroundKind::constant;
  spec.p0 = 120;
  spec.noise_sigma = 1.0;
  spec.seed = 7;
  BoxEvent ev;
  ev.x = 4;
  ev.y = 10;
  ev.box_width = 12;
  ev.box_height = 10;
  ev.amplitude = 80;
  ev.from = 25;
  ev.to = 50;
  ev.dx = 1.0;
  spec.events.push_back(ev);
  const SynthVideo video = synth_video(spec);
  BgParams params;
  params.i2 = 0;
  params.seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(batch_background(video.frames.data, params));
  }
}
BENCHMARK(BM_BatchPipeline)->Unit(benchmark::kMillisecond);

void BM_IncrementalPipeline(benchmark::State& state) {
  SynthSpec spec;
  spec.height = 48;
  spec.width = 64;
  spec.n_frames = 60;
  spec.kind = BackgroundKind::constant;
  spec.p0 = 120;
  spec.noise_sigma = 1.0;
  spec.seed = 7;
  const SynthVideo video = synth_video(spec);
  BgParams params;
  params.p = 3;
  params.ir = 0;
  params.seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(incremental_background(video.frames.data, params));
  }
}
BENCHMARK(BM_IncrementalPipeline)->Unit(benchmark::kMillisecond);

void BM_Mssim(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const Matrix g = randn(144, 176, rng) * 20.0 + Matrix::Constant(144, 176, 128.0);
  const Matrix r = g + randn(144, 176, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mssim(g, r));
  }
}
BENCHMARK(BM_Mssim);

}  // namespace

BENCHMARK_MAIN();
