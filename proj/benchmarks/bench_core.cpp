#include <benchmark/benchmark.h>

#include <map>

#include "toolrag/dataset.hpp"
#include "toolrag/retrieval.hpp"
#include "toolrag/synthetic.hpp"
#include "toolrag/turn_parser.hpp"

namespace {

using namespace toolrag;

const SyntheticCorpus& corpus(std::size_t tools) {
  static std::map<std::size_t, SyntheticCorpus> cache;
  auto it = cache.find(tools);
  if (it == cache.end()) it = cache.emplace(tools, generate_lexical_corpus(tools, 64, 1)).first;
  return it->second;
}

void BM_Bm25ScoreAll(benchmark::State& state) {
  const auto& c = corpus(static_cast<std::size_t>(state.range(0)));
  Bm25Index index = Bm25Index::build(c.registry);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.score_all(c.queries[i++ % c.queries.size()].text));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Bm25ScoreAll)->Arg(50)->Arg(500)->Arg(5000);

void BM_RetrieveTopK(benchmark::State& state) {
  const auto& c = corpus(static_cast<std::size_t>(state.range(0)));
  Retriever retriever = Retriever::build(c.registry, {});
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(retrieve_top_k(retriever, c.queries[i++ % c.queries.size()].text, 10));
  }
}
BENCHMARK(BM_RetrieveTopK)->Arg(50)->Arg(500)->Arg(5000);

void BM_DenseTopK(benchmark::State& state) {
  const auto& c = corpus(static_cast<std::size_t>(state.range(0)));
  RetrievalConfig config;
  config.backend = RetrievalBackend::kDense;
  Retriever retriever = Retriever::build(c.registry, config, hash_embedding_provider(kDefaultEmbeddingDimension));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(retrieve_top_k(retriever, c.queries[i++ % c.queries.size()].text, 10));
  }
}
BENCHMARK(BM_DenseTopK)->Arg(50)->Arg(500);

void BM_ParseTurnCalls(benchmark::State& state) {
  const std::string raw =
      "I will look this up.\n```json\n"
      R"([{"name": "dailymed_get_spl", "arguments": {"drug_name": "warfarin"}},)"
      R"( {"name": "interaction_checker", "arguments": {"drug_name": "amiodarone"}}])"
      "\n```\n";
  for (auto _ : state) benchmark::DoNotOptimize(parse_turn(raw));
}
BENCHMARK(BM_ParseTurnCalls);

void BM_ParseTurnFinal(benchmark::State& state) {
  const std::string raw = "The label warns about bleeding risk.\n**FINAL ANSWER: B**";
  for (auto _ : state) benchmark::DoNotOptimize(parse_turn(raw));
}
BENCHMARK(BM_ParseTurnFinal);

void BM_PermuteOptions(benchmark::State& state) {
  auto questions = generate_dataset(parse_dataset_shape("bench:256/256/0"), 5);
  PermutationSpec spec;
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(permute_options(questions[i++ % questions.size()], spec));
}
BENCHMARK(BM_PermuteOptions);

}  // namespace
BENCHMARK_MAIN();
