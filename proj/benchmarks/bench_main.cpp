#include <benchmark/benchmark.h>

#include <random>

#include "courtphase/analysis.hpp"
#include "courtphase/clustering.hpp"
#include "courtphase/features.hpp"
#include "courtphase/kalman.hpp"
#include "courtphase/synth.hpp"

using namespace courtphase;

namespace {

const SyntheticSession& match() {
  static const SyntheticSession syn = generate_session(eight_formation_scenario(600'000, 0.3, 1));
  return syn;
}

const FeatureMatrix& features() {
  static const FeatureMatrix m = build_feature_matrix(regularize(match().session, GridOptions{20, std::nullopt, std::nullopt}));
  return m;
}

}  // namespace

static void BM_Regularize(benchmark::State& state) {
  const TimestampMs step = state.range(0);
  for (auto _ : state) {
    std::size_t frames = 0;
    stream_frames(match().session, GridOptions{step, std::nullopt, std::nullopt},
                  [&](TimestampMs, std::span<const Point>, std::span<const std::uint8_t>) { ++frames; });
    benchmark::DoNotOptimize(frames);
    state.SetItemsProcessed(state.items_processed() + static_cast<std::int64_t>(frames));
  }
}
BENCHMARK(BM_Regularize)->Arg(20)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_Features(benchmark::State& state) {
  const FrameSeries frames = regularize(match().session, GridOptions{20, std::nullopt, std::nullopt});
  for (auto _ : state) benchmark::DoNotOptimize(build_feature_matrix(frames));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(frames.frame_count()));
}
BENCHMARK(BM_Features)->Unit(benchmark::kMillisecond);

static void BM_Kalman(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<double> series(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < series.size(); ++i) series[i] = 0.04 * static_cast<double>(i) + noise(rng);
  const KalmanParams p = KalmanParams{}.with_grid_step(20);
  for (auto _ : state) benchmark::DoNotOptimize(filter_axis(series, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Kalman)->Arg(30'000)->Arg(3'500'000)->Unit(benchmark::kMillisecond);

static void BM_KMeans(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(features().view(), {k, 0, 1, 300, 1e-8}));
}
BENCHMARK(BM_KMeans)->Arg(4)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_MDS(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 28.0);
  std::vector<Point> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({u(rng), u(rng) / 2});
  const auto pairs = pairwise_distances(pts);
  const auto d = pair_vector_to_matrix(pairs, 5);
  for (auto _ : state) benchmark::DoNotOptimize(classical_mds(d, 5, 2));
}
BENCHMARK(BM_MDS);

BENCHMARK_MAIN();
