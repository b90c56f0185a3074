#include "citerec/triplets.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "citerec/error.hpp"
#include "citerec/rng.hpp"
#include "citerec/text.hpp"
#include "json_util.hpp"

namespace citerec {

std::string_view strategy_name(NegativeStrategy strategy) {
  return strategy == NegativeStrategy::kRandom ? "random" : "bm25_hard";
}

NegativeStrategy parse_strategy(std::string_view name) {
  if (name == "random") return NegativeStrategy::kRandom;
  if (name == "bm25_hard") return NegativeStrategy::kBm25Hard;
  throw Error(ErrorCode::kConfigError, "unknown strategy \"" + std::string(name) + "\"");
}

namespace {

void require_enough(const DocId& anchor, std::size_t available, std::size_t wanted) {
  if (available < wanted) {
    throw Error(ErrorCode::kNoNegativesAvailable,
                "query " + anchor + " has " + std::to_string(available) +
                    " non-cited candidates, " + std::to_string(wanted) + " needed");
  }
}

}  // namespace

std::vector<Triplet> sample_triplets(const Corpus& corpus, const SplitSpec& split,
                                     const TripletOptions& options, const Bm25Index* index) {
  if (split.train_query_ids.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "split has no training queries");
  }
  if (options.negatives_per_positive == 0) {
    throw Error(ErrorCode::kInvalidArgument, "negatives_per_positive must be >= 1");
  }
  if (options.strategy == NegativeStrategy::kBm25Hard && index == nullptr) {
    throw Error(ErrorCode::kMissingIndex, "bm25_hard sampling needs a BM25 index");
  }
  const std::size_t n_neg = options.negatives_per_positive;
  const std::vector<DocId> candidates = corpus.candidate_ids();
  Rng rng(options.seed);

  std::vector<Triplet> out;
  for (const auto& anchor : split.train_query_ids) {
    const Document* doc = corpus.find(anchor);
    if (doc == nullptr || doc->role != Role::kQuery) {
      throw Error(ErrorCode::kUnknownId, "train id " + anchor + " is not a query document");
    }
    const IdSet& cited = corpus.graph().forward(anchor);
    if (cited.empty()) continue;

    if (options.strategy == NegativeStrategy::kBm25Hard) {
      const auto tokens = tokenize(doc->abstract);
      const RankedList ranked = prefetch_topk(*index, tokens, index->size());
      std::vector<DocId> hard;
      for (const auto& e : ranked.entries) {
        if (!cited.contains(e.doc_id)) hard.push_back(e.doc_id);
        if (hard.size() == n_neg) break;
      }
      require_enough(anchor, hard.size(), n_neg);
      for (const auto& positive : cited) {
        for (const auto& negative : hard) out.push_back({anchor, positive, negative});
      }
      continue;
    }

    std::vector<DocId> pool;
    pool.reserve(candidates.size());
    std::copy_if(candidates.begin(), candidates.end(), std::back_inserter(pool),
                 [&](const DocId& id) { return !cited.contains(id); });
    require_enough(anchor, pool.size(), n_neg);
    for (const auto& positive : cited) {
      // Partial Fisher-Yates over a fresh copy: the first n_neg slots end up
      // holding a uniform sample without replacement.
      std::vector<DocId> draw = pool;
      for (std::size_t i = 0; i < n_neg; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_below(rng, draw.size() - i));
        std::swap(draw[i], draw[j]);
        out.push_back({anchor, positive, draw[i]});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t export_triplets(std::span<const Triplet> triplets, const Corpus& corpus,
                            std::ostream& out) {
  // Resolve everything first so a bad id leaves the stream untouched.
  std::ostringstream buffer;
  for (const auto& t : triplets) {
    const detail::json record = {{"anchor", corpus.at(t.anchor_id).abstract},
                                 {"anchor_id", t.anchor_id},
                                 {"positive", corpus.at(t.positive_id).abstract},
                                 {"positive_id", t.positive_id},
                                 {"negative", corpus.at(t.negative_id).abstract},
                                 {"negative_id", t.negative_id}};
    buffer << record.dump() << '\n';
  }
  out << buffer.str();
  return triplets.size();
}

}  // namespace citerec
