// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include <random>

#include "cpath/feature_cache.hpp"
#include "cpath/features.hpp"
#include "cpath/forest.hpp"
#include "cpath/knn.hpp"
#include "support/synthetic.hpp"

using namespace cpath;

namespace {

const std::vector<Patch>& patches() {
  static const auto p = [] {
    std::mt19937_64 rng(1);
    std::vector<Patch> out;
    for (int i = 0; i < 256; ++i) out.push_back(synth::uniform_patch(rng, 64, 64));
    return out;
  }();
  return p;
}

const TrainingSet& blobs() {
  static const auto s = [] {
    std::mt19937_64 rng(2);
    return synth::blobs(rng, 500, 3, 54, 0.5);
  }();
  return s;
}

template <bool Parallel>
void BM_ExtractBatch(benchmark::State& state) {
  const auto method = static_cast<Extractor>(state.range(0));
  for (auto _ : state) {
    auto m = Parallel ? extract_batch(patches(), method) : serial::extract_batch(patches(), method);
    benchmark::DoNotOptimize(m);
  }
  state.SetItemsProcessed(state.iterations() * patches().size());
}

template <bool Parallel>
void BM_KnnPredict(benchmark::State& state) {
  const auto& s = blobs();
  const auto model = fit_knn(s.features, s.labels, 3, {5});
  for (auto _ : state) {
    auto p = Parallel ? predict_batch(model, s.features) : serial::predict_batch(model, s.features);
    benchmark::DoNotOptimize(p);
  }
}

template <bool Parallel>
void BM_ForestFit(benchmark::State& state) {
  const auto& s = blobs();
  ForestParams params;
  params.trees = 32;
  for (auto _ : state) {
    auto f = Parallel ? fit_forest(s.features, s.labels, 3, params) : serial::fit_forest(s.features, s.labels, 3, params);
    benchmark::DoNotOptimize(f);
  }
}

struct CacheFixture {
  synth::TempDir dir{"bench"};
  DatasetManifest manifest;
  CacheFixture() {
    synth::ChromaticShift gen;
    gen.patches = 128;
    manifest = gen.write(dir.path);
  }
};

template <bool Parallel>
void BM_ComputeCache(benchmark::State& state) {
  static CacheFixture fx;
  for (auto _ : state) {
    auto c = Parallel ? compute_cache(fx.manifest, Extractor::HsvHist) : serial::compute_cache(fx.manifest, Extractor::HsvHist);
    benchmark::DoNotOptimize(c);
  }
}

}  // namespace

BENCHMARK(BM_ExtractBatch<false>)->Name("extract_batch/serial")->DenseRange(1, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExtractBatch<true>)->Name("extract_batch/omp")->DenseRange(1, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnPredict<false>)->Name("knn_predict/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnPredict<true>)->Name("knn_predict/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForestFit<false>)->Name("forest_fit/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForestFit<true>)->Name("forest_fit/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ComputeCache<false>)->Name("compute_cache/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ComputeCache<true>)->Name("compute_cache/omp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
