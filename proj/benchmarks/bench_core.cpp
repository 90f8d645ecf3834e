#include "svmtune/gridlike.hpp"
#include "svmtune/surface.hpp"
#include "svmtune/svm.hpp"

#include "fixtures.hpp"

#include <benchmark/benchmark.h>

#include <numeric>

using namespace svmtune;

namespace {

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

void BM_SmoTrain(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset ds = fixtures::make_blobs(n, 5, 2.0, 1);
  const TrainConfig cfg{4.0, 1e-3, 0};
  for (auto _ : state) benchmark::DoNotOptimize(train(ds.features, ds.labels, cfg, KernelSpec::rbf(0.2)));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SmoTrain)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void BM_CvEvaluation(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset ds = fixtures::make_blobs(n, 5, 2.0, 2);
  const auto rows = all_rows(n);
  const CvResponse cv(ds, rows, stratified_folds(ds.labels, rows, 5, 3), KernelSpec::Kind::rbf, {});
  double log2c = -5.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cv({log2c, -3.0}));
    log2c = log2c >= 15.0 ? -5.0 : log2c + 1.0;
  }
}
BENCHMARK(BM_CvEvaluation)->Arg(100)->Arg(200)->Arg(400);

void BM_UniformDesign(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ud_points(n));
}
BENCHMARK(BM_UniformDesign)->Arg(25)->Arg(100)->Arg(400);

}  // namespace

BENCHMARK_MAIN();
