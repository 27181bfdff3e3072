#include <benchmark/benchmark.h>

#include <numeric>

#include "ctp/forest.hpp"
#include "ctp/rng.hpp"

namespace {

// Label depends on two of the columns; the rest is noise.
ctp::rf::Dataset make_data(std::size_t n, std::size_t dim, std::uint64_t seed) {
  ctp::Rng rng(seed);
  ctp::rf::Dataset d(dim);
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = rng.uniform01();
    d.add(x, x[0] + x[dim / 2] > 1.0);
  }
  return d;
}

void BM_BestSplit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto data = make_data(n, 32, 1);
  std::vector<std::size_t> rows(n), features(32);
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(features.begin(), features.end(), 0);
  for (auto _ : state) benchmark::DoNotOptimize(ctp::rf::best_split(data, rows, features));
}
BENCHMARK(BM_BestSplit)->Arg(256)->Arg(2048);

void BM_GrowTree(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto data = make_data(n, 704, 2);
  const auto params = ctp::rf::ForestParams{}.resolved(n, 704);
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  for (auto _ : state) {
    ctp::Rng rng(3);
    benchmark::DoNotOptimize(ctp::rf::grow_tree(data, rows, params, rng));
  }
}
BENCHMARK(BM_GrowTree)->Arg(500)->Arg(1500)->Unit(benchmark::kMillisecond);

void BM_TrainForest(benchmark::State& state) {
  const auto data = make_data(1000, 704, 4);
  ctp::rf::ForestParams params;
  params.trees = 100;
  params.seed = 5;
  const auto threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ctp::rf::train(data, params, threads));
}
BENCHMARK(BM_TrainForest)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Predict(benchmark::State& state) {
  const auto data = make_data(1000, 704, 6);
  ctp::rf::ForestParams params;
  params.trees = 100;
  const auto forest = ctp::rf::train(data, params);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(forest.predict(data.row(i)));
    i = (i + 1) % data.size();
  }
}
BENCHMARK(BM_Predict);

}  // namespace
