#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citerec/corpus.hpp"
#include "citerec/embed.hpp"
#include "citerec/lexindex.hpp"

namespace citerec {

// bm25_only: lexical ranking alone.
// dense_full: cosine ranking of the whole candidate pool.
// prefetch_rerank: BM25+ top prefetch_k, reordered by cosine, cut to k.
// Pre-trained vs fine-tuned encoders differ only in which embedding files are
// supplied, so these three modes cover all four experimental setups.
enum class Mode { kBm25Only, kDenseFull, kPrefetchRerank };

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view name);  // kConfigError on unknown names

struct EmbeddingSource {
  std::shared_ptr<const EmbeddingStore> documents;
  std::shared_ptr<const EmbeddingStore> queries;
  // Free-text description echoed into run and report files.
  std::string label;
};

inline constexpr std::size_t kDefaultCutoff = 10;

struct SetupConfig {
  Mode mode = Mode::kBm25Only;
  std::size_t k = kDefaultCutoff;
  std::size_t prefetch_k = kDefaultCutoff;
  std::optional<EmbeddingSource> embeddings;

  // kConfigError for k == 0, prefetch_k < k, or a dense mode without both
  // stores; kDimensionMismatch when the two stores disagree on dim.
  void validate() const;
};

// The serialisable part of a SetupConfig.
struct RunDescriptor {
  Mode mode = Mode::kBm25Only;
  std::size_t k = kDefaultCutoff;
  std::size_t prefetch_k = kDefaultCutoff;
  std::string embeddings;  // label, empty for bm25_only

  static RunDescriptor from(const SetupConfig& config);
  friend bool operator==(const RunDescriptor&, const RunDescriptor&) = default;
};

struct RunResult {
  RunDescriptor config;
  std::map<DocId, RankedList> rankings;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

// Top-k of candidate_ids by cosine against query_vector.
RankedList rank_dense(const EmbeddingStore& doc_store, std::span<const double> query_vector,
                      std::span<const DocId> candidate_ids, std::size_t k);

// Same documents as prefetched, reordered by cosine; scores become cosines.
RankedList rerank(const RankedList& prefetched, const EmbeddingStore& doc_store,
                  std::span<const double> query_vector);

// Ranks one query. query_vector is ignored in bm25_only mode.
RankedList recommend(const Bm25Index& index, const SetupConfig& config,
                     std::span<const std::string> query_tokens,
                     std::span<const double> query_vector);

struct RunOptions {
  // 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

// Ranks every test query of the split. Queries are processed in parallel;
// the result does not depend on the thread count.
RunResult run_setup(const Corpus& corpus, const SplitSpec& split, const Bm25Index& index,
                    const SetupConfig& config, const RunOptions& options = {});

void write_run(const RunResult& run, std::ostream& out);
RunResult read_run(std::istream& in);

}  // namespace citerec
