#include <benchmark/benchmark.h>

#include "ctp/corpus.hpp"
#include "ctp/linkage.hpp"
#include "ctp/synthetic.hpp"

namespace {

void BM_SynthesizeDescription(benchmark::State& state) {
  ctp::SyntheticSpec spec;
  spec.n_trials = 100;
  const auto syn = ctp::generate_synthetic(spec);
  auto record = syn.trials.front();
  // Long enough that the truncation path runs.
  record.attributes.criteria = std::string(static_cast<std::size_t>(state.range(0)), 'x');
  for (auto _ : state) benchmark::DoNotOptimize(ctp::synthesize_description(record));
}
BENCHMARK(BM_SynthesizeDescription)->Arg(500)->Arg(50000);

void BM_LabelCorpus(benchmark::State& state) {
  ctp::SyntheticSpec spec;
  spec.n_trials = static_cast<std::size_t>(state.range(0));
  spec.unlabeled_fraction = 0.1;
  const auto syn = ctp::generate_synthetic(spec);
  for (auto _ : state) benchmark::DoNotOptimize(ctp::label_corpus(syn.trials, syn.tracker));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_LabelCorpus)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_GenerateSynthetic(benchmark::State& state) {
  ctp::SyntheticSpec spec;
  spec.n_trials = static_cast<std::size_t>(state.range(0));
  spec.signal = ctp::PlantedSignal{};
  for (auto _ : state) benchmark::DoNotOptimize(ctp::generate_synthetic(spec));
}
BENCHMARK(BM_GenerateSynthetic)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
