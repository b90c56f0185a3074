#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "citerec/corpus.hpp"
#include "citerec/lexindex.hpp"

namespace citerec {

// Dense vectors keyed by document id, stored row-major in one buffer.
// Rows keep insertion order. Every row has length dim() and nonzero norm.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dim, std::string provenance = {});

  // kDimensionMismatch, kZeroVector, kDuplicateId, or kSchemaError for a
  // non-finite component.
  void add(const DocId& id, std::span<const double> vector);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::string& provenance() const noexcept { return provenance_; }
  const std::vector<DocId>& ids() const noexcept { return ids_; }

  bool contains(std::string_view id) const;
  // kMissingEmbedding when absent.
  std::span<const double> at(std::string_view id) const;
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * dim_, dim_);
  }

  friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
    return a.dim_ == b.dim_ && a.ids_ == b.ids_ && a.data_ == b.data_;
  }

 private:
  std::size_t dim_;
  std::string provenance_;
  std::vector<DocId> ids_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> rows_;
};

// Reads {"id": str, "vector": [number, ...]} JSON Lines. When expected_dim is
// absent the first record fixes the dimension.
EmbeddingStore load_embeddings(std::istream& in,
                               std::optional<std::size_t> expected_dim = std::nullopt,
                               std::string provenance = {});

// Shortest round-trip decimal for every component, so load(write(s)) == s.
void write_embeddings(const EmbeddingStore& store, std::ostream& out);

// Cosine similarity in double precision. kDimensionMismatch for unequal
// lengths, kZeroVector when either side has zero norm.
double cosine(std::span<const double> u, std::span<const double> v);

// Offline stand-in for a neural encoder: idf-weighted feature hashing with a
// sign hash. Each in-vocabulary token occurrence adds sign(token) * idf(token)
// to coordinate hash(token) % dim, where both hashes come from
// seeded_hash(token, seed). The sum is scaled to unit L2 norm.
// kInvalidArgument for dim < 2, kNoKnownTokens when no token is indexed,
// kZeroVector when the signed contributions cancel exactly.
std::vector<double> hashed_embedding(const Bm25Index& index, std::string_view text,
                                     std::size_t dim, std::uint64_t seed);

// hashed_embedding applied to the abstracts of every document with the given
// role, in id order.
EmbeddingStore hashed_store(const Bm25Index& index, const Corpus& corpus, Role role,
                            std::size_t dim, std::uint64_t seed);

// Same, for an explicit list of document ids (kUnknownId if one is missing).
EmbeddingStore hashed_store(const Bm25Index& index, const Corpus& corpus,
                            std::span<const DocId> ids, std::size_t dim, std::uint64_t seed);

}  // namespace citerec
