#include "citerec/evalmetrics.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_set>

#include "citerec/error.hpp"
#include "json_util.hpp"

namespace citerec {

using detail::json;

std::string_view ap_normalization_name(ApNormalization norm) {
  return norm == ApNormalization::kMinRelevantK ? "min_relevant_k" : "relevant";
}

ApNormalization parse_ap_normalization(std::string_view name) {
  if (name == "min_relevant_k") return ApNormalization::kMinRelevantK;
  if (name == "relevant") return ApNormalization::kRelevant;
  throw Error(ErrorCode::kConfigError,
              "unknown AP normalization \"" + std::string(name) + "\"");
}

namespace {

std::span<const DocId> top(std::span<const DocId> ranked, const IdSet& relevant,
                           std::size_t k) {
  if (relevant.empty()) {
    throw Error(ErrorCode::kEmptyRelevantSet, "relevant set is empty");
  }
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  const auto head = ranked.first(std::min(k, ranked.size()));
  std::unordered_set<std::string_view> seen;
  for (const auto& id : head) {
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::kInvalidArgument, "ranking repeats document " + id);
    }
  }
  return head;
}

}  // namespace

double average_precision_at_k(std::span<const DocId> ranked, const IdSet& relevant,
                              std::size_t k, ApNormalization norm) {
  const auto head = top(ranked, relevant, k);
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < head.size(); ++i) {
    if (relevant.contains(head[i])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  const std::size_t denom =
      norm == ApNormalization::kMinRelevantK ? std::min(relevant.size(), k) : relevant.size();
  return sum / static_cast<double>(denom);
}

double recall_at_k(std::span<const DocId> ranked, const IdSet& relevant, std::size_t k) {
  const auto head = top(ranked, relevant, k);
  const auto hits = std::count_if(head.begin(), head.end(),
                                  [&](const DocId& id) { return relevant.contains(id); });
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double reciprocal_rank_at_k(std::span<const DocId> ranked, const IdSet& relevant,
                            std::size_t k) {
  const auto head = top(ranked, relevant, k);
  for (std::size_t i = 0; i < head.size(); ++i) {
    if (relevant.contains(head[i])) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

EvalReport evaluate_run(const RunResult& run, const CitationGraph& graph, std::size_t k,
                        ApNormalization norm) {
  if (run.rankings.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "run has no ranked queries");
  }
  EvalReport report;
  report.config = run.config;
  report.k = k;
  report.ap_normalization = norm;
  for (const auto& [qid, list] : run.rankings) {
    const IdSet& relevant = graph.forward(qid);
    if (relevant.empty()) {
      throw Error(ErrorCode::kQueryWithoutLabels, "query " + qid + " cites no document");
    }
    const auto ids = list.doc_ids();
    QueryMetrics m;
    m.ap = average_precision_at_k(ids, relevant, k, norm);
    m.recall = recall_at_k(ids, relevant, k);
    m.rr = reciprocal_rank_at_k(ids, relevant, k);
    m.n_relevant = relevant.size();
    report.map += m.ap;
    report.recall += m.recall;
    report.mrr += m.rr;
    report.per_query.emplace(qid, m);
  }
  report.n_queries = report.per_query.size();
  const auto n = static_cast<double>(report.n_queries);
  report.map /= n;
  report.recall /= n;
  report.mrr /= n;
  return report;
}

void write_report(const EvalReport& report, std::ostream& out) {
  using detail::round6;
  json per_query = json::object();
  for (const auto& [qid, m] : report.per_query) {
    per_query[qid] = {{"ap", round6(m.ap)},
                      {"recall", round6(m.recall)},
                      {"rr", round6(m.rr)},
                      {"n_relevant", m.n_relevant}};
  }
  json config = {{"mode", std::string(mode_name(report.config.mode))},
                 {"k", report.config.k},
                 {"prefetch_k", report.config.prefetch_k}};
  config["embeddings"] =
      report.config.embeddings.empty() ? json(nullptr) : json(report.config.embeddings);
  const json j = {
      {"config", std::move(config)},
      {"k", report.k},
      {"ap_normalization", std::string(ap_normalization_name(report.ap_normalization))},
      {"n_queries", report.n_queries},
      {"aggregate",
       {{"map", round6(report.map)}, {"recall", round6(report.recall)}, {"mrr", round6(report.mrr)}}},
      {"per_query", std::move(per_query)}};
  out << j.dump(2) << '\n';
}

}  // namespace citerec
