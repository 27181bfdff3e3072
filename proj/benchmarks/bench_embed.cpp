#include <benchmark/benchmark.h>

#include "ctp/embed.hpp"
#include "ctp/synthetic.hpp"

namespace {

const std::vector<ctp::TrialRecord>& trials() {
  static const auto syn = [] {
    ctp::SyntheticSpec spec;
    spec.n_trials = 500;
    spec.seed = 1;
    return ctp::generate_synthetic(spec);
  }();
  return syn.trials;
}

void BM_HashingEmbedCriteria(benchmark::State& state) {
  const auto h = static_cast<std::size_t>(state.range(0));
  const auto& text = trials().front().attributes.criteria;
  for (auto _ : state) benchmark::DoNotOptimize(ctp::hashing_embed(text, h, 7));
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_HashingEmbedCriteria)->Arg(64)->Arg(768);

void BM_EmbedRecords(benchmark::State& state) {
  ctp::HashingEncoder enc(static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) {
    ctp::EmbeddingCache cache;
    benchmark::DoNotOptimize(ctp::embed_records(trials(), enc, &cache));
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * trials().size()));
}
BENCHMARK(BM_EmbedRecords)->Arg(64)->Arg(768)->Unit(benchmark::kMillisecond);

}  // namespace
