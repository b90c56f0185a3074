#include "citerec/corpus.hpp"

#include <cmath>
#include <ostream>

#include "citerec/error.hpp"
#include "citerec/rng.hpp"
#include "json_util.hpp"

namespace citerec {

using detail::json;

namespace {

const IdSet& empty_set() {
  static const IdSet kEmpty;
  return kEmpty;
}

json document_to_json(const Document& doc) {
  json j = {{"id", doc.id},
            {"role", std::string(role_name(doc.role))},
            {"title", doc.title},
            {"abstract", doc.abstract}};
  if (doc.full_text) j["full_text"] = *doc.full_text;
  return j;
}

json citation_to_json(const DocId& citing, const DocId& cited) {
  return {{"citing_id", citing}, {"cited_id", cited}};
}

Document document_from_json(const json& record, const std::string& where,
                            const LoadOptions& options, LoadStats& stats) {
  Document doc;
  doc.id = detail::require_string(record, "id", where);
  try {
    doc.role = parse_role(detail::require_string(record, "role", where));
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchemaError, where + ": " + e.what());
  }
  doc.title = preprocess_text(detail::require_string(record, "title", where));

  if (record.contains("full_text")) {
    doc.full_text = detail::require_string(record, "full_text", where);
  }
  std::string abstract;
  if (record.contains("abstract")) {
    abstract = preprocess_text(detail::require_string(record, "abstract", where));
  }
  if (abstract.empty() && doc.full_text) {
    const std::string text = preprocess_text(*doc.full_text);
    try {
      abstract = extract_abstract(text, options.max_abstract_tokens);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMissingAbstractMarker ||
          !options.abstract_fallback) {
        throw Error(e.code(), where + " (id " + doc.id + "): " + e.what());
      }
      abstract = leading_words(text, options.max_abstract_tokens);
      ++stats.abstract_fallbacks;
    }
  } else if (!record.contains("abstract") && !doc.full_text) {
    throw Error(ErrorCode::kSchemaError,
                where + ": record needs \"abstract\" or \"full_text\"");
  }
  doc.abstract = std::move(abstract);
  return doc;
}

}  // namespace

std::string_view role_name(Role role) {
  return role == Role::kCandidate ? "candidate" : "query";
}

Role parse_role(std::string_view name) {
  if (name == "candidate") return Role::kCandidate;
  if (name == "query") return Role::kQuery;
  throw Error(ErrorCode::kSchemaError,
              "role must be \"candidate\" or \"query\", got \"" +
                  std::string(name) + "\"");
}

bool CitationGraph::add_edge(const DocId& citing, const DocId& cited) {
  if (!forward_[citing].insert(cited).second) return false;
  reverse_[cited].insert(citing);
  ++edge_count_;
  return true;
}

const IdSet& CitationGraph::forward(const DocId& citing) const {
  const auto it = forward_.find(citing);
  return it == forward_.end() ? empty_set() : it->second;
}

const IdSet& CitationGraph::reverse(const DocId& cited) const {
  const auto it = reverse_.find(cited);
  return it == reverse_.end() ? empty_set() : it->second;
}

bool CitationGraph::contains(const DocId& citing, const DocId& cited) const {
  return forward(citing).contains(cited);
}

std::vector<std::pair<DocId, DocId>> CitationGraph::edges() const {
  std::vector<std::pair<DocId, DocId>> out;
  out.reserve(edge_count_);
  for (const auto& [citing, cited_set] : forward_) {
    for (const auto& cited : cited_set) out.emplace_back(citing, cited);
  }
  return out;
}

void Corpus::add_document(Document doc) {
  if (doc.id.empty()) {
    throw Error(ErrorCode::kSchemaError, "document id must be non-empty");
  }
  if (doc.abstract.empty()) {
    throw Error(ErrorCode::kSchemaError,
                "document " + doc.id + " has an empty abstract");
  }
  if (documents_.contains(doc.id)) {
    throw Error(ErrorCode::kDuplicateId, "duplicate document id " + doc.id);
  }
  if (doc.role == Role::kCandidate) ++candidates_;
  auto id = doc.id;
  documents_.emplace(std::move(id), std::move(doc));
}

bool Corpus::add_citation(const DocId& citing, const DocId& cited) {
  const Document* from = find(citing);
  const Document* to = find(cited);
  if (from == nullptr || to == nullptr) {
    throw Error(ErrorCode::kDanglingEdge,
                "edge " + citing + " -> " + cited + " references unknown id " +
                    (from == nullptr ? citing : cited));
  }
  if (from->role != Role::kQuery || to->role != Role::kCandidate) {
    throw Error(ErrorCode::kSchemaError,
                "edge " + citing + " -> " + cited +
                    " must run from a query to a candidate");
  }
  return graph_.add_edge(citing, cited);
}

const Document* Corpus::find(std::string_view id) const {
  const auto it = documents_.find(id);
  return it == documents_.end() ? nullptr : &it->second;
}

const Document& Corpus::at(std::string_view id) const {
  const Document* doc = find(id);
  if (doc == nullptr) {
    throw Error(ErrorCode::kUnknownId, "unknown document id " + std::string(id));
  }
  return *doc;
}

std::vector<DocId> Corpus::candidate_ids() const {
  std::vector<DocId> ids;
  ids.reserve(candidates_);
  for (const auto& [id, doc] : documents_) {
    if (doc.role == Role::kCandidate) ids.push_back(id);
  }
  return ids;
}

std::vector<DocId> Corpus::query_ids() const {
  std::vector<DocId> ids;
  ids.reserve(query_count());
  for (const auto& [id, doc] : documents_) {
    if (doc.role == Role::kQuery) ids.push_back(id);
  }
  return ids;
}

void Corpus::validate() const {
  if (candidate_count() == 0 || query_count() == 0) {
    throw Error(ErrorCode::kSchemaError,
                "corpus needs at least one candidate and one query document");
  }
}

LoadedCorpus load_corpus(std::istream& documents, std::istream& citations,
                         const LoadOptions& options) {
  LoadedCorpus result;
  auto& [corpus, stats] = result;

  detail::for_each_jsonl(documents, "documents", [&](const json& record,
                                                     const std::string& where) {
    Document doc = document_from_json(record, where, options, stats);
    try {
      corpus.add_document(std::move(doc));
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
  });

  detail::for_each_jsonl(citations, "citations", [&](const json& record,
                                                     const std::string& where) {
    const auto citing = detail::require_string(record, "citing_id", where);
    const auto cited = detail::require_string(record, "cited_id", where);
    if (options.skip_dangling && (!corpus.contains(citing) || !corpus.contains(cited))) {
      ++stats.dropped_dangling;
      return;
    }
    try {
      if (!corpus.add_citation(citing, cited)) ++stats.duplicate_edges;
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
  });

  corpus.validate();
  stats.documents = corpus.documents().size();
  stats.candidates = corpus.candidate_count();
  stats.queries = corpus.query_count();
  stats.edges = corpus.graph().edge_count();
  return result;
}

void write_documents(const Corpus& corpus, std::ostream& out) {
  for (const auto& [id, doc] : corpus.documents()) {
    out << document_to_json(doc).dump() << '\n';
  }
}

void write_citations(const Corpus& corpus, std::ostream& out) {
  for (const auto& [citing, cited] : corpus.graph().edges()) {
    out << citation_to_json(citing, cited).dump() << '\n';
  }
}

namespace {
constexpr std::string_view kCorpusFormat = "citerec-corpus";
constexpr int kCorpusVersion = 1;
}  // namespace

void save_corpus_store(const Corpus& corpus, std::ostream& out) {
  json docs = json::array();
  for (const auto& [id, doc] : corpus.documents()) docs.push_back(document_to_json(doc));
  json cites = json::array();
  for (const auto& [citing, cited] : corpus.graph().edges()) {
    cites.push_back(citation_to_json(citing, cited));
  }
  json store = {{"format", kCorpusFormat},
                {"version", kCorpusVersion},
                {"documents", std::move(docs)},
                {"citations", std::move(cites)}};
  out << store.dump() << '\n';
}

Corpus load_corpus_store(std::istream& in) {
  const json store = detail::parse_json_stream(in, "corpus store");
  if (!store.is_object() || store.value("format", "") != kCorpusFormat) {
    throw Error(ErrorCode::kSchemaError, "not a citerec corpus store");
  }
  if (store.value("version", 0) != kCorpusVersion) {
    throw Error(ErrorCode::kSchemaError, "unsupported corpus store version");
  }
  const auto& docs = detail::require_field(store, "documents", "corpus store");
  const auto& cites = detail::require_field(store, "citations", "corpus store");
  if (!docs.is_array() || !cites.is_array()) {
    throw Error(ErrorCode::kSchemaError,
                "corpus store: documents and citations must be arrays");
  }
  Corpus corpus;
  LoadStats unused;
  std::size_t i = 0;
  for (const auto& record : docs) {
    const std::string where = "corpus store document " + std::to_string(i++);
    if (!record.is_object()) {
      throw Error(ErrorCode::kSchemaError, where + ": expected a JSON object");
    }
    corpus.add_document(document_from_json(record, where, LoadOptions{}, unused));
  }
  i = 0;
  for (const auto& record : cites) {
    const std::string where = "corpus store citation " + std::to_string(i++);
    if (!record.is_object()) {
      throw Error(ErrorCode::kSchemaError, where + ": expected a JSON object");
    }
    corpus.add_citation(detail::require_string(record, "citing_id", where),
                        detail::require_string(record, "cited_id", where));
  }
  corpus.validate();
  return corpus;
}

SplitSpec split_queries(const Corpus& corpus, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::kInvalidRatio,
                "split ratio must lie strictly between 0 and 1");
  }
  std::vector<DocId> ids = corpus.query_ids();  // already sorted
  if (ids.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "splitting needs at least two query documents");
  }
  Rng rng(seed);
  shuffle_in_place(std::span<DocId>(ids), rng);

  const auto n_train = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(ids.size())));
  SplitSpec split;
  split.ratio = ratio;
  split.seed = seed;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    (i < n_train ? split.train_query_ids : split.test_query_ids).insert(ids[i]);
  }
  return split;
}

void write_split(const SplitSpec& split, std::ostream& out) {
  const json j = {{"ratio", split.ratio},
                  {"seed", split.seed},
                  {"train", split.train_query_ids},
                  {"test", split.test_query_ids}};
  out << j.dump(2) << '\n';
}

SplitSpec read_split(std::istream& in) {
  const json j = detail::parse_json_stream(in, "split file");
  if (!j.is_object()) throw Error(ErrorCode::kSchemaError, "split file: expected an object");
  SplitSpec split;
  split.ratio = detail::require_number(j, "ratio", "split file");
  const auto& seed = detail::require_field(j, "seed", "split file");
  if (!seed.is_number_unsigned()) {
    throw Error(ErrorCode::kSchemaError, "split file: seed must be unsigned");
  }
  split.seed = seed.get<std::uint64_t>();
  for (const auto* key : {"train", "test"}) {
    const auto& ids = detail::require_field(j, key, "split file");
    if (!ids.is_array()) {
      throw Error(ErrorCode::kSchemaError,
                  std::string("split file: \"") + key + "\" must be an array");
    }
    auto& target = std::string_view(key) == "train" ? split.train_query_ids
                                                    : split.test_query_ids;
    for (const auto& id : ids) {
      if (!id.is_string() || !target.insert(id.get<std::string>()).second) {
        throw Error(ErrorCode::kSchemaError,
                    std::string("split file: bad or repeated id in \"") + key + "\"");
      }
    }
  }
  for (const auto& id : split.train_query_ids) {
    if (split.test_query_ids.contains(id)) {
      throw Error(ErrorCode::kSchemaError,
                  "split file: id " + id + " is in both train and test");
    }
  }
  return split;
}

}  // namespace citerec
