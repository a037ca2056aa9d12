#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "datasets.hpp"
#include "vocspace/features.hpp"
#include "vocspace/neighbors.hpp"
#include "vocspace/stats.hpp"
#include "vocspace/tsne.hpp"
#include "vocspace/umap.hpp"

namespace {

using namespace vocspace;

std::vector<double> tone(std::size_t n, int fs) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 0.01);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 0.4 * std::sin(2 * std::numbers::pi * 310.0 * double(i) / fs) + g(rng);
  }
  return x;
}

void BM_ClipFeatures(benchmark::State& state) {
  const int fs = 16000;
  const FrameParams p;
  const auto x = tone(static_cast<std::size_t>(state.range(0)) * fs / 1000, fs);
  for (auto _ : state) {
    const auto c = mfcc(frame_signal(x, fs, p), p, fs);
    benchmark::DoNotOptimize(summarize_clip(stack_features(c, deltas(c, p.delta_window))));
  }
}
BENCHMARK(BM_ClipFeatures)->Arg(600)->Arg(2000)->Arg(12000)->Unit(benchmark::kMicrosecond);

void BM_KnnExact(benchmark::State& state) {
  const auto x = testdata::gaussian(static_cast<std::size_t>(state.range(0)), 39, 2);
  for (auto _ : state) benchmark::DoNotOptimize(knn_exact(x, 15));
}
BENCHMARK(BM_KnnExact)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_KnnDescent(benchmark::State& state) {
  const auto x = testdata::gaussian(static_cast<std::size_t>(state.range(0)), 39, 2);
  for (auto _ : state) benchmark::DoNotOptimize(knn_descent(x, 15, 3));
}
BENCHMARK(BM_KnnDescent)->Arg(4000)->Arg(16000)->Unit(benchmark::kMillisecond);

void BM_UmapLayout(benchmark::State& state) {
  const auto data = testdata::blobs(static_cast<std::size_t>(state.range(0)), 3, 39, 1.0, 4);
  const auto graph = fuzzy_graph(build_knn(data.points, 15, 4));
  const auto curve = fit_ab(0.1);
  const auto init = initialize(graph, InitMethod::Random, 4);
  UmapParams params;
  params.n_epochs = 200;
  for (auto _ : state) {
    auto coords = init.coords;
    benchmark::DoNotOptimize(optimize_layout(graph, coords, curve, params));
  }
}
BENCHMARK(BM_UmapLayout)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_Tsne(benchmark::State& state) {
  const auto data = testdata::blobs(static_cast<std::size_t>(state.range(0)), 3, 39, 1.0, 5);
  TsneParams params;
  params.n_epochs = 300;
  for (auto _ : state) benchmark::DoNotOptimize(tsne_embed(data.points, params));
}
BENCHMARK(BM_Tsne)->Arg(300)->Arg(900)->Unit(benchmark::kMillisecond);

void BM_FitLmm(benchmark::State& state) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<RegressionRow> rows;
  const auto infants = static_cast<std::size_t>(state.range(0));
  for (std::size_t i = 0; i < infants; ++i) {
    const double u = g(rng);
    for (int age : {3, 6, 9, 18}) {
      const double count = 40.0 + 10.0 * std::abs(g(rng));
      rows.push_back({"i" + std::to_string(i), age, count,
                      1.0 + 0.5 * age - 0.02 * age * age + u + 0.3 * g(rng)});
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_lmm(rows));
}
BENCHMARK(BM_FitLmm)->Arg(12)->Arg(100)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
