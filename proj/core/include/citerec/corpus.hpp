#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "citerec/text.hpp"

namespace citerec {

using DocId = std::string;
using IdSet = std::set<DocId>;

enum class Role { kCandidate, kQuery };

std::string_view role_name(Role role);
Role parse_role(std::string_view name);

// Candidates form the citable pool; queries are the citing articles whose
// abstracts drive retrieval.
struct Document {
  DocId id;
  Role role = Role::kCandidate;
  std::string title;
  std::string abstract;                  // preprocessed
  std::optional<std::string> full_text;  // raw, as supplied

  friend bool operator==(const Document&, const Document&) = default;
};

// Directed citing -> cited edges. Duplicate insertions are ignored.
class CitationGraph {
 public:
  // Returns false when the edge was already present.
  bool add_edge(const DocId& citing, const DocId& cited);

  const IdSet& forward(const DocId& citing) const;
  const IdSet& reverse(const DocId& cited) const;
  bool contains(const DocId& citing, const DocId& cited) const;

  // Sorted by (citing, cited).
  std::vector<std::pair<DocId, DocId>> edges() const;
  std::size_t edge_count() const noexcept { return edge_count_; }

  friend bool operator==(const CitationGraph& a, const CitationGraph& b) {
    return a.forward_ == b.forward_;
  }

 private:
  std::map<DocId, IdSet> forward_;
  std::map<DocId, IdSet> reverse_;
  std::size_t edge_count_ = 0;
};

class Corpus {
 public:
  // Throws kDuplicateId or kSchemaError (empty id / empty abstract).
  void add_document(Document doc);

  // Both endpoints must already exist (kDanglingEdge), the citing one as a
  // query and the cited one as a candidate (kSchemaError). Returns false for a
  // duplicate edge.
  bool add_citation(const DocId& citing, const DocId& cited);

  const Document* find(std::string_view id) const;
  const Document& at(std::string_view id) const;  // kUnknownId if absent
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  const std::map<DocId, Document, std::less<>>& documents() const noexcept {
    return documents_;
  }
  const CitationGraph& graph() const noexcept { return graph_; }

  // Sorted lexicographically.
  std::vector<DocId> candidate_ids() const;
  std::vector<DocId> query_ids() const;
  std::size_t candidate_count() const noexcept { return candidates_; }
  std::size_t query_count() const noexcept { return documents_.size() - candidates_; }

  // Requires at least one candidate and one query; kSchemaError otherwise.
  void validate() const;

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.documents_ == b.documents_ && a.graph_ == b.graph_;
  }

 private:
  std::map<DocId, Document, std::less<>> documents_;
  CitationGraph graph_;
  std::size_t candidates_ = 0;
};

struct LoadOptions {
  bool skip_dangling = false;
  // Use the leading max_abstract_tokens words of full_text when it has no
  // "abstract" keyword instead of failing with kMissingAbstractMarker.
  bool abstract_fallback = false;
  std::size_t max_abstract_tokens = kDefaultMaxAbstractTokens;
};

struct LoadStats {
  std::size_t documents = 0;
  std::size_t candidates = 0;
  std::size_t queries = 0;
  std::size_t edges = 0;
  std::size_t dropped_dangling = 0;
  std::size_t duplicate_edges = 0;
  std::size_t abstract_fallbacks = 0;
};

struct LoadedCorpus {
  Corpus corpus;
  LoadStats stats;
};

// Reads the documents and citations JSON Lines streams. Text fields are
// preprocessed on the way in; abstracts missing from a record are extracted
// from its full_text.
LoadedCorpus load_corpus(std::istream& documents, std::istream& citations,
                         const LoadOptions& options = {});

// Writes the same JSON Lines formats load_corpus reads, in id order.
void write_documents(const Corpus& corpus, std::ostream& out);
void write_citations(const Corpus& corpus, std::ostream& out);

// Single-file corpus store produced by `citerec ingest`.
void save_corpus_store(const Corpus& corpus, std::ostream& out);
Corpus load_corpus_store(std::istream& in);

struct SplitSpec {
  IdSet train_query_ids;
  IdSet test_query_ids;
  double ratio = 0.7;
  std::uint64_t seed = 0;

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

inline constexpr double kDefaultTrainRatio = 0.7;

// Sorts query ids, shuffles them with shuffle_in_place over mt19937_64(seed),
// and assigns the first round(ratio * n) to train.
SplitSpec split_queries(const Corpus& corpus, double ratio, std::uint64_t seed);

void write_split(const SplitSpec& split, std::ostream& out);
SplitSpec read_split(std::istream& in);

}  // namespace citerec
