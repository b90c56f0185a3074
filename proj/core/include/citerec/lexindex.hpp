#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "citerec/corpus.hpp"

namespace citerec {

// BM25+ knobs. Defaults match the rank-bm25 BM25Plus implementation.
struct Bm25Params {
  double k1 = 1.5;
  double b = 0.75;
  double delta = 1.0;

  // kInvalidArgument unless k1 >= 0, 0 <= b <= 1 and delta >= 0.
  void validate() const;

  friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

struct ScoredDoc {
  DocId doc_id;
  double score = 0.0;

  friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

// Ranking order used everywhere: higher score first, then doc id ascending.
inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc_id < b.doc_id;
}

struct RankedList {
  DocId query_id;
  std::vector<ScoredDoc> entries;

  std::vector<DocId> doc_ids() const;

  friend bool operator==(const RankedList&, const RankedList&) = default;
};

struct TokenizedDoc {
  DocId id;
  std::vector<std::string> tokens;
};

// Immutable inverted index over candidate abstracts.
//
// Postings are stored CSR-style: one contiguous array of (doc, tf) pairs with
// per-term offsets. Documents are numbered in ascending id order, so postings
// sorted by number are also sorted by id. The per-document length
// normalisation k1 * (1 - b + b * |D| / avgdl) is precomputed.
class Bm25Index {
 public:
  struct Posting {
    std::uint32_t doc;
    std::uint32_t tf;

    friend bool operator==(const Posting&, const Posting&) = default;
  };

  // Throws kEmptyCandidatePool for no documents or no tokens at all, and
  // kDuplicateId for repeated ids.
  static Bm25Index from_documents(std::vector<TokenizedDoc> docs,
                                  const Bm25Params& params = {});

  const Bm25Params& params() const noexcept { return params_; }
  std::size_t size() const noexcept { return doc_ids_.size(); }
  double avgdl() const noexcept { return avgdl_; }
  std::size_t vocabulary_size() const noexcept { return terms_.size(); }

  const std::vector<DocId>& doc_ids() const noexcept { return doc_ids_; }
  // Throws kUnknownDocument.
  std::uint32_t doc_number(std::string_view doc_id) const;
  std::uint32_t doc_length(std::string_view doc_id) const;

  bool has_term(const std::string& term) const;
  std::size_t document_frequency(const std::string& term) const;
  // 0 for terms outside the vocabulary.
  double idf(const std::string& term) const;
  std::uint32_t term_frequency(const std::string& term, std::string_view doc_id) const;
  std::span<const Posting> postings(const std::string& term) const;

  double score(std::span<const std::string> query_tokens,
               std::string_view doc_id) const;

  // Scores every indexed document. Entry i belongs to doc_ids()[i]. The values
  // are bit-identical to score() for the same document.
  std::vector<double> score_all(std::span<const std::string> query_tokens) const;

  RankedList top_k(std::span<const std::string> query_tokens, std::size_t k) const;

  // Versioned little-endian binary format, starting with the magic bytes
  // "CRBM25IX". Rebuilding from the same input produces identical bytes.
  void save(std::ostream& out) const;
  static Bm25Index load(std::istream& in);

  friend bool operator==(const Bm25Index& a, const Bm25Index& b) {
    return a.params_ == b.params_ && a.doc_ids_ == b.doc_ids_ &&
           a.doc_len_ == b.doc_len_ && a.terms_ == b.terms_ &&
           a.offsets_ == b.offsets_ && a.postings_ == b.postings_;
  }

 private:
  Bm25Index() = default;
  void finalize();
  std::int64_t term_id(const std::string& term) const;
  // Sum over in-vocabulary query tokens of delta * idf; added last by both
  // score() and score_all().
  double lower_bound_total(std::span<const std::string> query_tokens) const;
  double tf_component(std::uint32_t doc, std::uint32_t tf) const {
    const double t = static_cast<double>(tf);
    return t * (params_.k1 + 1.0) / (length_norm_[doc] + t);
  }

  Bm25Params params_;
  std::vector<DocId> doc_ids_;
  std::vector<std::uint32_t> doc_len_;
  std::vector<std::string> terms_;
  std::vector<std::uint64_t> offsets_;  // terms_.size() + 1
  std::vector<Posting> postings_;

  // Derived on build/load.
  double avgdl_ = 0.0;
  std::vector<double> idf_;
  std::vector<double> length_norm_;
  std::unordered_map<std::string, std::uint32_t> term_lookup_;
  std::unordered_map<std::string, std::uint32_t> doc_lookup_;
};

// Indexes the abstracts of all candidate documents.
Bm25Index build_index(const Corpus& corpus, const Bm25Params& params = {});

double bm25_score(const Bm25Index& index, std::span<const std::string> query_tokens,
                  std::string_view doc_id);

// Top-k documents by bm25_score, all of them when k exceeds the index size.
// kEmptyQuery for an empty token list, kInvalidArgument for k == 0.
RankedList prefetch_topk(const Bm25Index& index,
                         std::span<const std::string> query_tokens, std::size_t k);

}  // namespace citerec
