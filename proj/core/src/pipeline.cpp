#include "citerec/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <ostream>
#include <thread>

#include "citerec/error.hpp"
#include "citerec/text.hpp"
#include "json_util.hpp"

namespace citerec {

using detail::json;

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::kBm25Only: return "bm25_only";
    case Mode::kDenseFull: return "dense_full";
    case Mode::kPrefetchRerank: return "prefetch_rerank";
  }
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  if (name == "bm25_only") return Mode::kBm25Only;
  if (name == "dense_full") return Mode::kDenseFull;
  if (name == "prefetch_rerank") return Mode::kPrefetchRerank;
  throw Error(ErrorCode::kConfigError, "unknown mode \"" + std::string(name) + "\"");
}

void SetupConfig::validate() const {
  if (k == 0) throw Error(ErrorCode::kConfigError, "k must be >= 1");
  if (prefetch_k < k) {
    throw Error(ErrorCode::kConfigError, "prefetch_k must be >= k");
  }
  if (mode == Mode::kBm25Only) return;
  if (!embeddings || !embeddings->documents || !embeddings->queries) {
    throw Error(ErrorCode::kConfigError,
                std::string(mode_name(mode)) + " needs document and query embeddings");
  }
  if (embeddings->documents->dim() != embeddings->queries->dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "document embeddings have dim " + std::to_string(embeddings->documents->dim()) +
                    ", query embeddings have dim " +
                    std::to_string(embeddings->queries->dim()));
  }
}

RunDescriptor RunDescriptor::from(const SetupConfig& config) {
  RunDescriptor d;
  d.mode = config.mode;
  d.k = config.k;
  d.prefetch_k = config.prefetch_k;
  if (config.mode != Mode::kBm25Only && config.embeddings) d.embeddings = config.embeddings->label;
  return d;
}

RankedList rank_dense(const EmbeddingStore& doc_store, std::span<const double> query_vector,
                      std::span<const DocId> candidate_ids, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (query_vector.size() != doc_store.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "query vector has length " + std::to_string(query_vector.size()) +
                    ", document store dimension is " + std::to_string(doc_store.dim()));
  }
  RankedList out;
  out.entries.reserve(candidate_ids.size());
  for (const auto& id : candidate_ids) {
    out.entries.push_back({id, cosine(query_vector, doc_store.at(id))});
  }
  const std::size_t keep = std::min(k, out.entries.size());
  std::partial_sort(out.entries.begin(), out.entries.begin() + static_cast<std::ptrdiff_t>(keep),
                    out.entries.end(), ranks_before);
  out.entries.resize(keep);
  return out;
}

RankedList rerank(const RankedList& prefetched, const EmbeddingStore& doc_store,
                  std::span<const double> query_vector) {
  RankedList out;
  out.query_id = prefetched.query_id;
  out.entries.reserve(prefetched.entries.size());
  for (const auto& e : prefetched.entries) {
    out.entries.push_back({e.doc_id, cosine(query_vector, doc_store.at(e.doc_id))});
  }
  std::sort(out.entries.begin(), out.entries.end(), ranks_before);
  return out;
}

RankedList recommend(const Bm25Index& index, const SetupConfig& config,
                     std::span<const std::string> query_tokens,
                     std::span<const double> query_vector) {
  config.validate();
  switch (config.mode) {
    case Mode::kBm25Only:
      return prefetch_topk(index, query_tokens, config.k);
    case Mode::kDenseFull:
      return rank_dense(*config.embeddings->documents, query_vector, index.doc_ids(), config.k);
    case Mode::kPrefetchRerank: {
      RankedList ranked = rerank(prefetch_topk(index, query_tokens, config.prefetch_k),
                                 *config.embeddings->documents, query_vector);
      if (ranked.entries.size() > config.k) ranked.entries.resize(config.k);
      return ranked;
    }
  }
  throw Error(ErrorCode::kConfigError, "unknown mode");
}

namespace {

void check_index_matches(const Corpus& corpus, const Bm25Index& index) {
  if (index.doc_ids() != corpus.candidate_ids()) {
    throw Error(ErrorCode::kConfigError,
                "index was not built from this corpus's candidate documents");
  }
}

}  // namespace

RunResult run_setup(const Corpus& corpus, const SplitSpec& split, const Bm25Index& index,
                    const SetupConfig& config, const RunOptions& options) {
  config.validate();
  check_index_matches(corpus, index);

  const std::vector<DocId> queries(split.test_query_ids.begin(), split.test_query_ids.end());
  for (const auto& q : queries) {
    const Document* doc = corpus.find(q);
    if (doc == nullptr || doc->role != Role::kQuery) {
      throw Error(ErrorCode::kConfigError, "split test id " + q + " is not a query document");
    }
  }

  std::vector<RankedList> ranked(queries.size());
  std::vector<std::exception_ptr> failures(queries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < queries.size(); i = next++) {
      try {
        const Document& doc = corpus.at(queries[i]);
        const auto tokens = tokenize(doc.abstract);
        std::span<const double> qvec;
        if (config.mode != Mode::kBm25Only) qvec = config.embeddings->queries->at(doc.id);
        ranked[i] = recommend(index, config, tokens, qvec);
        ranked[i].query_id = doc.id;
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };

  unsigned threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(queries.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  // Report the failure of the first query in id order, independent of scheduling.
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const Error& e) {
      throw Error(e.code(), "query " + queries[i] + ": " + e.what());
    }
  }

  RunResult result;
  result.config = RunDescriptor::from(config);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    result.rankings.emplace(queries[i], std::move(ranked[i]));
  }
  return result;
}

namespace {

json descriptor_to_json(const RunDescriptor& d) {
  json j = {{"mode", std::string(mode_name(d.mode))}, {"k", d.k}, {"prefetch_k", d.prefetch_k}};
  j["embeddings"] = d.embeddings.empty() ? json(nullptr) : json(d.embeddings);
  return j;
}

std::size_t require_count(const json& obj, const char* key, const std::string& where) {
  const json& v = detail::require_field(obj, key, where);
  if (!v.is_number_unsigned() || v.get<std::size_t>() == 0) {
    throw Error(ErrorCode::kSchemaError,
                where + ": \"" + key + "\" must be a positive integer");
  }
  return v.get<std::size_t>();
}

}  // namespace

void write_run(const RunResult& run, std::ostream& out) {
  json rankings = json::object();
  for (const auto& [qid, list] : run.rankings) {
    json entries = json::array();
    for (const auto& e : list.entries) entries.push_back({{"doc_id", e.doc_id}, {"score", e.score}});
    rankings[qid] = std::move(entries);
  }
  const json j = {{"config", descriptor_to_json(run.config)}, {"rankings", std::move(rankings)}};
  out << j.dump(1) << '\n';
}

RunResult read_run(std::istream& in) {
  const json j = detail::parse_json_stream(in, "run file");
  if (!j.is_object()) throw Error(ErrorCode::kSchemaError, "run file: expected an object");
  const json& cfg = detail::require_field(j, "config", "run file");
  const std::string where = "run file config";
  RunResult run;
  try {
    run.config.mode = parse_mode(detail::require_string(cfg, "mode", where));
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchemaError, where + ": " + e.what());
  }
  run.config.k = require_count(cfg, "k", where);
  run.config.prefetch_k = require_count(cfg, "prefetch_k", where);
  if (const auto it = cfg.find("embeddings"); it != cfg.end() && it->is_string()) {
    run.config.embeddings = it->get<std::string>();
  }
  const json& rankings = detail::require_field(j, "rankings", "run file");
  if (!rankings.is_object()) {
    throw Error(ErrorCode::kSchemaError, "run file: \"rankings\" must be an object");
  }
  for (const auto& [qid, entries] : rankings.items()) {
    const std::string qwhere = "run file ranking " + qid;
    if (!entries.is_array()) throw Error(ErrorCode::kSchemaError, qwhere + ": expected an array");
    RankedList list;
    list.query_id = qid;
    for (const auto& e : entries) {
      if (!e.is_object()) throw Error(ErrorCode::kSchemaError, qwhere + ": bad entry");
      list.entries.push_back({detail::require_string(e, "doc_id", qwhere),
                              detail::require_number(e, "score", qwhere)});
    }
    run.rankings.emplace(qid, std::move(list));
  }
  return run;
}

}  // namespace citerec
