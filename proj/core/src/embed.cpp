#include "citerec/embed.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "citerec/error.hpp"
#include "citerec/rng.hpp"
#include "citerec/text.hpp"
#include "json_util.hpp"

namespace citerec {

using detail::json;

EmbeddingStore::EmbeddingStore(std::size_t dim, std::string provenance)
    : dim_(dim), provenance_(std::move(provenance)) {
  if (dim_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "embedding dimension must be positive");
  }
}

void EmbeddingStore::add(const DocId& id, std::span<const double> vector) {
  if (vector.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector for " + id + " has length " + std::to_string(vector.size()) +
                    ", store dimension is " + std::to_string(dim_));
  }
  double norm2 = 0.0;
  for (const double x : vector) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kSchemaError, "vector for " + id + " has a non-finite value");
    }
    norm2 += x * x;
  }
  if (norm2 == 0.0) {
    throw Error(ErrorCode::kZeroVector, "vector for " + id + " is all zeros");
  }
  if (rows_.contains(id)) {
    throw Error(ErrorCode::kDuplicateId, "duplicate embedding id " + id);
  }
  rows_.emplace(id, ids_.size());
  ids_.push_back(id);
  data_.insert(data_.end(), vector.begin(), vector.end());
}

bool EmbeddingStore::contains(std::string_view id) const {
  return rows_.contains(std::string(id));
}

std::span<const double> EmbeddingStore::at(std::string_view id) const {
  const auto it = rows_.find(std::string(id));
  if (it == rows_.end()) {
    throw Error(ErrorCode::kMissingEmbedding, "no embedding for " + std::string(id));
  }
  return row(it->second);
}

EmbeddingStore load_embeddings(std::istream& in, std::optional<std::size_t> expected_dim,
                               std::string provenance) {
  std::optional<EmbeddingStore> store;
  if (expected_dim) store.emplace(*expected_dim, provenance);
  std::vector<double> buffer;
  detail::for_each_jsonl(in, "embeddings", [&](const json& record, const std::string& where) {
    const auto id = detail::require_string(record, "id", where);
    if (id.empty()) throw Error(ErrorCode::kSchemaError, where + ": empty id");
    const json& vec = detail::require_field(record, "vector", where);
    if (!vec.is_array() || vec.empty()) {
      throw Error(ErrorCode::kSchemaError, where + ": \"vector\" must be a non-empty array");
    }
    buffer.clear();
    for (const auto& x : vec) {
      if (!x.is_number()) {
        throw Error(ErrorCode::kSchemaError, where + ": vector entries must be numbers");
      }
      buffer.push_back(x.get<double>());
    }
    if (!store) store.emplace(buffer.size(), provenance);
    try {
      store->add(id, buffer);
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
  });
  if (!store) {
    throw Error(ErrorCode::kSchemaError,
                "embeddings file is empty and no dimension was given");
  }
  return std::move(*store);
}

void write_embeddings(const EmbeddingStore& store, std::ostream& out) {
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto row = store.row(i);
    json record = {{"id", store.ids()[i]},
                   {"vector", std::vector<double>(row.begin(), row.end())}};
    out << record.dump() << '\n';
  }
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cosine of vectors with lengths " + std::to_string(u.size()) + " and " +
                    std::to_string(v.size()));
  }
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) {
    throw Error(ErrorCode::kZeroVector, "cosine of a zero vector");
  }
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

std::vector<double> hashed_embedding(const Bm25Index& index, std::string_view text,
                                     std::size_t dim, std::uint64_t seed) {
  if (dim < 2) {
    throw Error(ErrorCode::kInvalidArgument, "hashed embedding dimension must be >= 2");
  }
  std::vector<double> v(dim, 0.0);
  bool any_known = false;
  for (const auto& token : tokenize(text)) {
    if (!index.has_term(token)) continue;
    any_known = true;
    const std::uint64_t h = seeded_hash(token, seed);
    const double sign = (mix64(h) >> 63) != 0 ? -1.0 : 1.0;
    v[h % dim] += sign * index.idf(token);
  }
  if (!any_known) {
    throw Error(ErrorCode::kNoKnownTokens, "text has no token in the index vocabulary");
  }
  double norm2 = 0.0;
  for (const double x : v) norm2 += x * x;
  if (norm2 == 0.0) {
    throw Error(ErrorCode::kZeroVector, "hashed token contributions cancel out");
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : v) x *= inv;
  return v;
}

EmbeddingStore hashed_store(const Bm25Index& index, const Corpus& corpus,
                            std::span<const DocId> ids, std::size_t dim, std::uint64_t seed) {
  EmbeddingStore store(dim, "hashed(dim=" + std::to_string(dim) +
                                ",seed=" + std::to_string(seed) + ")");
  for (const auto& id : ids) {
    const Document& doc = corpus.at(id);
    try {
      store.add(id, hashed_embedding(index, doc.abstract, dim, seed));
    } catch (const Error& e) {
      throw Error(e.code(), "document " + id + ": " + e.what());
    }
  }
  return store;
}

EmbeddingStore hashed_store(const Bm25Index& index, const Corpus& corpus, Role role,
                            std::size_t dim, std::uint64_t seed) {
  const auto ids = role == Role::kCandidate ? corpus.candidate_ids() : corpus.query_ids();
  return hashed_store(index, corpus, ids, dim, seed);
}

}  // namespace citerec
