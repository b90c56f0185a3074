#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string_view>

#include "citerec/corpus.hpp"
#include "citerec/pipeline.hpp"

namespace citerec {

// Denominator of AP@k: min(|relevant|, k) or |relevant|.
enum class ApNormalization { kMinRelevantK, kRelevant };

std::string_view ap_normalization_name(ApNormalization norm);
ApNormalization parse_ap_normalization(std::string_view name);

// All three throw kEmptyRelevantSet for an empty relevant set and
// kInvalidArgument for k == 0 or a repeated id within the top k. Positions
// beyond k never affect the result.
double average_precision_at_k(std::span<const DocId> ranked, const IdSet& relevant,
                              std::size_t k,
                              ApNormalization norm = ApNormalization::kMinRelevantK);
double recall_at_k(std::span<const DocId> ranked, const IdSet& relevant, std::size_t k);
double reciprocal_rank_at_k(std::span<const DocId> ranked, const IdSet& relevant,
                            std::size_t k);

struct QueryMetrics {
  double ap = 0.0;
  double recall = 0.0;
  double rr = 0.0;
  std::size_t n_relevant = 0;
};

struct EvalReport {
  RunDescriptor config;
  std::size_t k = kDefaultCutoff;
  ApNormalization ap_normalization = ApNormalization::kMinRelevantK;
  std::map<DocId, QueryMetrics> per_query;
  double map = 0.0;
  double recall = 0.0;
  double mrr = 0.0;
  std::size_t n_queries = 0;
};

// Relevant documents of query q are graph.forward(q). Aggregates are
// unweighted means over queries. kQueryWithoutLabels when a ranked query has
// no outgoing citation; kInvalidArgument for an empty run.
EvalReport evaluate_run(const RunResult& run, const CitationGraph& graph, std::size_t k,
                        ApNormalization norm = ApNormalization::kMinRelevantK);

// JSON with sorted keys; metric values rounded to six decimals.
void write_report(const EvalReport& report, std::ostream& out);

}  // namespace citerec
