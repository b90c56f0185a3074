#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "citerec/corpus.hpp"
#include "citerec/evalmetrics.hpp"
#include "citerec/lexindex.hpp"
#include "citerec/pipeline.hpp"
#include "citerec/triplets.hpp"

namespace citerec::cli {

enum class Command { kIngest, kSplit, kIndex, kEmbed, kQuery, kRun, kEvaluate, kExportTriplets };

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;

// Flat bag of every flag; each command reads the subset it declares.
struct CliConfig {
  Command command = Command::kIngest;

  std::string documents_path;
  std::string citations_path;
  std::string corpus_path;
  std::string split_path;
  std::string index_path;
  std::string run_path;
  std::string doc_embeddings_path;
  std::string query_embeddings_path;
  std::string out_path;

  // ingest
  bool skip_dangling = false;
  bool abstract_fallback = false;
  std::size_t max_abstract_tokens = kDefaultMaxAbstractTokens;

  // split / triplets
  double ratio = kDefaultTrainRatio;
  std::uint64_t seed = 42;

  Bm25Params bm25;

  // run / evaluate / query
  Mode mode = Mode::kBm25Only;
  std::size_t k = kDefaultCutoff;
  std::size_t prefetch_k = kDefaultCutoff;
  bool fallback_embeddings = false;
  std::size_t dim = 256;
  std::uint64_t embed_seed = 0;
  unsigned threads = 0;
  ApNormalization ap_normalization = ApNormalization::kMinRelevantK;

  // embed
  std::string role = "all";

  // query
  std::string query_text;
  std::string query_id;

  // export-triplets
  NegativeStrategy strategy = NegativeStrategy::kRandom;
  std::size_t negatives = 1;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown by parse_args for --help; what() is the help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// args excludes the program name. Throws UsageError or HelpRequested.
CliConfig parse_args(const std::vector<std::string>& args);

// Runs one command. Returns kExitOk or kExitError; on error the output file
// is not created.
int execute(const CliConfig& config, std::ostream& out, std::ostream& err);

// parse_args + execute with exit-code mapping (2 for usage errors).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace citerec::cli
