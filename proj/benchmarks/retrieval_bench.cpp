#include <benchmark/benchmark.h>

#include <algorithm>
#include <string>
#include <vector>

#include "citerec/embed.hpp"
#include "citerec/evalmetrics.hpp"
#include "citerec/lexindex.hpp"
#include "citerec/pipeline.hpp"
#include "citerec/rng.hpp"

namespace {

using namespace citerec;

// Zipf-ish vocabulary: low word numbers are far more frequent.
std::string random_word(Rng& rng, std::size_t vocabulary) {
  const std::size_t a = uniform_below(rng, vocabulary);
  const std::size_t b = uniform_below(rng, vocabulary);
  return "w" + std::to_string(a < b ? a : b);
}

std::vector<TokenizedDoc> random_docs(std::size_t n, std::size_t length, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TokenizedDoc> docs(n);
  for (std::size_t i = 0; i < n; ++i) {
    docs[i].id = "doc" + std::to_string(i);
    for (std::size_t t = 0; t < length; ++t) docs[i].tokens.push_back(random_word(rng, 20000));
  }
  return docs;
}

std::vector<std::string> random_query(std::size_t length, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> q;
  for (std::size_t t = 0; t < length; ++t) q.push_back(random_word(rng, 20000));
  return q;
}

std::vector<double> random_vector(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (auto& x : v) x = static_cast<double>(uniform_below(rng, 2001)) / 1000.0 - 1.0;
  v[0] += 2.0;
  return v;
}

void BM_BuildIndex(benchmark::State& state) {
  const auto docs = random_docs(static_cast<std::size_t>(state.range(0)), 150, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Bm25Index::from_documents(docs));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildIndex)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_PrefetchTopK(benchmark::State& state) {
  const Bm25Index index =
      Bm25Index::from_documents(random_docs(static_cast<std::size_t>(state.range(0)), 150, 2));
  const auto query = random_query(150, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(prefetch_topk(index, query, 100));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PrefetchTopK)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_Rerank(benchmark::State& state) {
  const std::size_t dim = 768;
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  EmbeddingStore store(dim, "bench");
  RankedList prefetched;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "doc" + std::to_string(i);
    store.add(id, random_vector(rng, dim));
    prefetched.entries.push_back({id, static_cast<double>(n - i)});
  }
  const auto query = random_vector(rng, dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rerank(prefetched, store, query));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Rerank)->Arg(10)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_Metrics(benchmark::State& state) {
  Rng rng(5);
  std::vector<DocId> ranked;
  for (int i = 0; i < 10; ++i) ranked.push_back("doc" + std::to_string(uniform_below(rng, 50)));
  std::sort(ranked.begin(), ranked.end());
  ranked.erase(std::unique(ranked.begin(), ranked.end()), ranked.end());
  IdSet relevant;
  for (int i = 0; i < 8; ++i) relevant.insert("doc" + std::to_string(uniform_below(rng, 50)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(average_precision_at_k(ranked, relevant, 10));
    benchmark::DoNotOptimize(recall_at_k(ranked, relevant, 10));
    benchmark::DoNotOptimize(reciprocal_rank_at_k(ranked, relevant, 10));
  }
}
BENCHMARK(BM_Metrics);

}  // namespace

BENCHMARK_MAIN();
