#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "citerec/corpus.hpp"
#include "citerec/lexindex.hpp"

namespace citerec {

struct Triplet {
  DocId anchor_id;    // train-split query
  DocId positive_id;  // candidate cited by the anchor
  DocId negative_id;  // candidate not cited by the anchor

  friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

enum class NegativeStrategy { kRandom, kBm25Hard };

std::string_view strategy_name(NegativeStrategy strategy);
NegativeStrategy parse_strategy(std::string_view name);

struct TripletOptions {
  NegativeStrategy strategy = NegativeStrategy::kRandom;
  std::size_t negatives_per_positive = 1;
  std::uint64_t seed = 0;
};

// For every train query and each candidate it cites, emits
// negatives_per_positive triplets with distinct negatives.
//   random:   negatives drawn without replacement from the anchor's non-cited
//             candidates with an mt19937_64(seed) stream consumed in
//             (anchor, positive) order.
//   bm25_hard: the anchor's highest-ranked non-cited candidates under BM25+
//             (the same negatives for every positive of that anchor).
// Output is sorted by (anchor, positive, negative).
// Errors: kMissingIndex (bm25_hard without index), kNoNegativesAvailable (an
// anchor has fewer non-cited candidates than negatives_per_positive),
// kUnknownId (train id that is not a query document), kInvalidArgument.
std::vector<Triplet> sample_triplets(const Corpus& corpus, const SplitSpec& split,
                                     const TripletOptions& options,
                                     const Bm25Index* index = nullptr);

// One JSON Lines record per triplet with the abstracts resolved:
// {"anchor", "anchor_id", "negative", "negative_id", "positive", "positive_id"}.
// kUnknownId if any id is missing from the corpus; nothing is written then.
std::size_t export_triplets(std::span<const Triplet> triplets, const Corpus& corpus,
                            std::ostream& out);

}  // namespace citerec
