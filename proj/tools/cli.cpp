#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "citerec/embed.hpp"
#include "citerec/error.hpp"
#include "citerec/text.hpp"
#include "json.hpp"

namespace citerec::cli {
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kModes = {"bm25_only", "dense_full", "prefetch_rerank"};

struct RawFlags {
  std::string mode = "bm25_only";
  std::string strategy = "random";
  std::string ap_norm = "min_relevant_k";
};

void add_bm25_flags(CLI::App& cmd, CliConfig& c) {
  cmd.add_option("--k1", c.bm25.k1, "BM25+ term-frequency saturation")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--b", c.bm25.b, "BM25+ length normalisation")->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--delta", c.bm25.delta, "BM25+ lower-bound bonus")
      ->check(CLI::NonNegativeNumber);
}

void add_ranking_flags(CLI::App& cmd, CliConfig& c, RawFlags& raw) {
  cmd.add_option("--mode", raw.mode, "Ranking setup")->check(CLI::IsMember(kModes));
  cmd.add_option("--k", c.k, "Cutoff / number of results")->check(CLI::PositiveNumber);
  cmd.add_option("--prefetch-k", c.prefetch_k, "BM25+ candidates passed to the re-ranker")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--index", c.index_path, "Index file (built from the corpus when omitted)");
  add_bm25_flags(cmd, c);
  cmd.add_option("--doc-embeddings", c.doc_embeddings_path, "Candidate embeddings (JSON Lines)");
  cmd.add_option("--query-embeddings", c.query_embeddings_path, "Query embeddings (JSON Lines)");
  cmd.add_flag("--fallback-embeddings", c.fallback_embeddings,
               "Use the built-in hashed embedder instead of embedding files");
  cmd.add_option("--dim", c.dim, "Hashed embedding dimension")->check(CLI::Range(2, 1 << 20));
  cmd.add_option("--embed-seed", c.embed_seed, "Hashed embedding seed");
  cmd.add_option("--threads", c.threads, "Worker threads (0 = hardware concurrency)");
}

void check_embedding_flags(const CliConfig& c) {
  const bool files = !c.doc_embeddings_path.empty() || !c.query_embeddings_path.empty();
  if (files && c.fallback_embeddings) {
    throw UsageError("--fallback-embeddings cannot be combined with --doc-embeddings/--query-embeddings");
  }
  if (c.mode == Mode::kBm25Only) return;
  if (files && (c.doc_embeddings_path.empty() || c.query_embeddings_path.empty())) {
    throw UsageError("--doc-embeddings and --query-embeddings must be given together");
  }
  if (!files && !c.fallback_embeddings) {
    throw UsageError("--mode " + std::string(mode_name(c.mode)) +
                     " needs --doc-embeddings and --query-embeddings, or --fallback-embeddings");
  }
}

void check_ranking_flags(const CliConfig& c) {
  if (c.prefetch_k < c.k) throw UsageError("--prefetch-k must be >= --k");
  check_embedding_flags(c);
}

}  // namespace

CliConfig parse_args(const std::vector<std::string>& args) {
  CliConfig c;
  RawFlags raw;
  CLI::App app{"citerec: two-stage citation recommendation (BM25+ prefetch, dense re-rank)"};
  app.name("citerec");
  app.require_subcommand(1, 1);
  app.option_defaults()->always_capture_default();

  auto* ingest = app.add_subcommand("ingest", "Load documents and citations into a corpus store");
  ingest->add_option("--documents", c.documents_path, "Documents JSON Lines")->required();
  ingest->add_option("--citations", c.citations_path, "Citations JSON Lines")->required();
  ingest->add_option("--out", c.out_path, "Corpus store to write")->required();
  ingest->add_flag("--skip-dangling", c.skip_dangling, "Drop citations with unknown endpoints");
  ingest->add_flag("--abstract-fallback", c.abstract_fallback,
                   "Use the leading words of full_text when it has no 'abstract' keyword");
  ingest->add_option("--max-abstract-tokens", c.max_abstract_tokens, "Abstract length cap")
      ->check(CLI::PositiveNumber);

  auto* split = app.add_subcommand("split", "Split query documents into train and test");
  split->add_option("--corpus", c.corpus_path, "Corpus store")->required();
  split->add_option("--ratio", c.ratio, "Fraction of queries used for training, in (0, 1)");
  split->add_option("--seed", c.seed, "Shuffle seed");
  split->add_option("--out", c.out_path, "Split file to write")->required();

  auto* index = app.add_subcommand("index", "Build the BM25+ index over candidate abstracts");
  index->add_option("--corpus", c.corpus_path, "Corpus store")->required();
  add_bm25_flags(*index, c);
  index->add_option("--out", c.out_path, "Index file to write")->required();

  auto* embed = app.add_subcommand("embed", "Write hashed fallback embeddings");
  embed->add_option("--corpus", c.corpus_path, "Corpus store")->required();
  embed->add_option("--index", c.index_path, "Index file (built from the corpus when omitted)");
  add_bm25_flags(*embed, c);
  embed->add_option("--role", c.role, "Which documents to embed")
      ->check(CLI::IsMember({"candidate", "query", "all"}));
  embed->add_option("--dim", c.dim, "Embedding dimension")->check(CLI::Range(2, 1 << 20));
  embed->add_option("--embed-seed", c.embed_seed, "Hash seed");
  embed->add_option("--out", c.out_path, "Embeddings file to write")->required();

  auto* query = app.add_subcommand("query", "Recommend citations for one text or query document");
  query->add_option("--corpus", c.corpus_path, "Corpus store")->required();
  auto* text_opt = query->add_option("--text", c.query_text, "Free text to use as the query");
  auto* id_opt = query->add_option("--query-id", c.query_id, "Query document id");
  text_opt->excludes(id_opt);
  add_ranking_flags(*query, c, raw);
  query->add_option("--out", c.out_path, "Write the ranking here instead of stdout");

  auto* run = app.add_subcommand("run", "Rank every test query and write a run file");
  run->add_option("--corpus", c.corpus_path, "Corpus store")->required();
  run->add_option("--split", c.split_path, "Split file")->required();
  add_ranking_flags(*run, c, raw);
  run->add_option("--out", c.out_path, "Run file to write")->required();

  auto* evaluate = app.add_subcommand(
      "evaluate", "Score a run (given with --run, or produced from the ranking flags)");
  evaluate->add_option("--corpus", c.corpus_path, "Corpus store")->required();
  evaluate->add_option("--run", c.run_path, "Existing run file");
  evaluate->add_option("--split", c.split_path, "Split file (when ranking here)");
  add_ranking_flags(*evaluate, c, raw);
  evaluate->add_option("--ap-normalization", raw.ap_norm, "AP@k denominator")
      ->check(CLI::IsMember({"min_relevant_k", "relevant"}));
  evaluate->add_option("--out", c.out_path, "Report file to write")->required();

  auto* triplets = app.add_subcommand("export-triplets", "Export training triplets");
  triplets->add_option("--corpus", c.corpus_path, "Corpus store")->required();
  triplets->add_option("--split", c.split_path, "Split file")->required();
  triplets->add_option("--index", c.index_path, "Index file for bm25_hard (built when omitted)");
  add_bm25_flags(*triplets, c);
  triplets->add_option("--strategy", raw.strategy, "Negative sampling")
      ->check(CLI::IsMember({"random", "bm25_hard"}));
  triplets->add_option("--negatives", c.negatives, "Negatives per positive")
      ->check(CLI::PositiveNumber);
  triplets->add_option("--seed", c.seed, "Sampling seed");
  triplets->add_option("--out", c.out_path, "Triplets JSON Lines to write")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested(app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  const std::vector<std::pair<CLI::App*, Command>> commands = {
      {ingest, Command::kIngest},     {split, Command::kSplit},
      {index, Command::kIndex},       {embed, Command::kEmbed},
      {query, Command::kQuery},       {run, Command::kRun},
      {evaluate, Command::kEvaluate}, {triplets, Command::kExportTriplets}};
  for (const auto& [sub, command] : commands) {
    if (sub->parsed()) c.command = command;
  }
  c.mode = parse_mode(raw.mode);
  c.strategy = parse_strategy(raw.strategy);
  c.ap_normalization = parse_ap_normalization(raw.ap_norm);

  switch (c.command) {
    case Command::kSplit:
      if (!(c.ratio > 0.0 && c.ratio < 1.0)) {
        throw UsageError("--ratio must lie strictly between 0 and 1");
      }
      break;
    case Command::kQuery:
      if (c.query_text.empty() && c.query_id.empty()) {
        throw UsageError("query needs --text or --query-id");
      }
      check_ranking_flags(c);
      if (c.mode != Mode::kBm25Only && !c.query_text.empty() && !c.fallback_embeddings) {
        throw UsageError("--text with a dense mode needs --fallback-embeddings");
      }
      break;
    case Command::kRun:
      check_ranking_flags(c);
      break;
    case Command::kEvaluate:
      if (c.run_path.empty()) {
        if (c.split_path.empty()) throw UsageError("evaluate needs --run or --split");
        check_ranking_flags(c);
      } else if (!c.split_path.empty()) {
        throw UsageError("--run and --split are mutually exclusive");
      }
      break;
    default:
      break;
  }
  return c;
}

// ---------------------------------------------------------------------------
// execute

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return in;
}

void require_file(const std::string& path, const char* flag) {
  if (!path.empty() && !fs::is_regular_file(path)) {
    throw Error(ErrorCode::kIoError, std::string(flag) + ": no such file " + path);
  }
}

void require_output_dir(const std::string& path) {
  if (path.empty()) return;
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw Error(ErrorCode::kIoError, "--out: directory " + parent.string() + " does not exist");
  }
  if (fs::is_directory(path)) {
    throw Error(ErrorCode::kIoError, "--out: " + path + " is a directory");
  }
}

// Writes through a temporary sibling and renames it into place, so a failure
// at any point leaves no file at `path`.
void write_atomically(const std::string& path, const std::function<void(std::ostream&)>& fill) {
  const std::string tmp = path + ".partial";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::kIoError, "cannot create " + path);
      fill(out);
      out.flush();
      if (!out) throw Error(ErrorCode::kIoError, "failed writing " + path);
    }
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw;
  }
}

Corpus read_corpus(const CliConfig& c) {
  auto in = open_input(c.corpus_path);
  return load_corpus_store(in);
}

Bm25Index obtain_index(const CliConfig& c, const Corpus& corpus) {
  if (c.index_path.empty()) return build_index(corpus, c.bm25);
  auto in = open_input(c.index_path);
  Bm25Index index = Bm25Index::load(in);
  if (index.doc_ids() != corpus.candidate_ids()) {
    throw Error(ErrorCode::kConfigError,
                c.index_path + " was not built from the candidates of " + c.corpus_path);
  }
  return index;
}

// query_ids: the queries that will be ranked; only these get fallback vectors.
SetupConfig make_setup(const CliConfig& c, const Corpus& corpus, const Bm25Index& index,
                       const std::vector<DocId>& query_ids) {
  SetupConfig setup;
  setup.mode = c.mode;
  setup.k = c.k;
  setup.prefetch_k = c.prefetch_k;
  if (c.mode == Mode::kBm25Only) return setup;
  EmbeddingSource source;
  if (c.fallback_embeddings) {
    source.documents = std::make_shared<EmbeddingStore>(
        hashed_store(index, corpus, Role::kCandidate, c.dim, c.embed_seed));
    source.queries = std::make_shared<EmbeddingStore>(
        hashed_store(index, corpus, query_ids, c.dim, c.embed_seed));
    source.label = "hashed(dim=" + std::to_string(c.dim) +
                   ",seed=" + std::to_string(c.embed_seed) + ")";
  } else {
    auto docs_in = open_input(c.doc_embeddings_path);
    source.documents = std::make_shared<EmbeddingStore>(
        load_embeddings(docs_in, std::nullopt, c.doc_embeddings_path));
    auto queries_in = open_input(c.query_embeddings_path);
    source.queries = std::make_shared<EmbeddingStore>(
        load_embeddings(queries_in, source.documents->dim(), c.query_embeddings_path));
    source.label = "documents=" + c.doc_embeddings_path + ";queries=" + c.query_embeddings_path;
  }
  setup.embeddings = std::move(source);
  return setup;
}

SplitSpec read_split_file(const CliConfig& c, const Corpus& corpus) {
  auto in = open_input(c.split_path);
  SplitSpec split = read_split(in);
  for (const auto* ids : {&split.train_query_ids, &split.test_query_ids}) {
    for (const auto& id : *ids) {
      const Document* doc = corpus.find(id);
      if (doc == nullptr || doc->role != Role::kQuery) {
        throw Error(ErrorCode::kConfigError,
                    c.split_path + ": " + id + " is not a query document of the corpus");
      }
    }
  }
  return split;
}

void validate_paths(const CliConfig& c) {
  require_file(c.documents_path, "--documents");
  require_file(c.citations_path, "--citations");
  require_file(c.corpus_path, "--corpus");
  require_file(c.split_path, "--split");
  require_file(c.index_path, "--index");
  require_file(c.run_path, "--run");
  require_file(c.doc_embeddings_path, "--doc-embeddings");
  require_file(c.query_embeddings_path, "--query-embeddings");
  require_output_dir(c.out_path);
}

void do_ingest(const CliConfig& c, std::ostream& out) {
  auto docs = open_input(c.documents_path);
  auto cites = open_input(c.citations_path);
  LoadOptions options;
  options.skip_dangling = c.skip_dangling;
  options.abstract_fallback = c.abstract_fallback;
  options.max_abstract_tokens = c.max_abstract_tokens;
  const LoadedCorpus loaded = load_corpus(docs, cites, options);
  write_atomically(c.out_path, [&](std::ostream& os) { save_corpus_store(loaded.corpus, os); });
  const auto& s = loaded.stats;
  out << "documents=" << s.documents << " candidates=" << s.candidates
      << " queries=" << s.queries << " edges=" << s.edges << '\n';
  if (s.dropped_dangling > 0) out << "dropped_dangling_edges=" << s.dropped_dangling << '\n';
  if (s.duplicate_edges > 0) out << "duplicate_edges=" << s.duplicate_edges << '\n';
  if (s.abstract_fallbacks > 0) out << "abstract_fallbacks=" << s.abstract_fallbacks << '\n';
}

void do_split(const CliConfig& c, std::ostream& out) {
  const Corpus corpus = read_corpus(c);
  const SplitSpec split = split_queries(corpus, c.ratio, c.seed);
  write_atomically(c.out_path, [&](std::ostream& os) { write_split(split, os); });
  out << "train=" << split.train_query_ids.size() << " test=" << split.test_query_ids.size()
      << '\n';
}

void do_index(const CliConfig& c, std::ostream& out) {
  const Corpus corpus = read_corpus(c);
  const Bm25Index index = build_index(corpus, c.bm25);
  write_atomically(c.out_path, [&](std::ostream& os) { index.save(os); });
  out << "indexed=" << index.size() << " terms=" << index.vocabulary_size()
      << " avgdl=" << index.avgdl() << '\n';
}

void do_embed(const CliConfig& c, std::ostream& out) {
  const Corpus corpus = read_corpus(c);
  const Bm25Index index = obtain_index(c, corpus);
  std::vector<EmbeddingStore> stores;
  if (c.role != "query") {
    stores.push_back(hashed_store(index, corpus, Role::kCandidate, c.dim, c.embed_seed));
  }
  if (c.role != "candidate") {
    stores.push_back(hashed_store(index, corpus, Role::kQuery, c.dim, c.embed_seed));
  }
  std::size_t n = 0;
  write_atomically(c.out_path, [&](std::ostream& os) {
    for (const auto& s : stores) {
      write_embeddings(s, os);
      n += s.size();
    }
  });
  out << "embedded=" << n << " dim=" << c.dim << '\n';
}

nlohmann::ordered_json ranking_json(const RankedList& list) {
  auto entries = nlohmann::ordered_json::array();
  for (const auto& e : list.entries) entries.push_back({{"doc_id", e.doc_id}, {"score", e.score}});
  return entries;
}

void do_query(const CliConfig& c, std::ostream& out) {
  const Corpus corpus = read_corpus(c);
  const Bm25Index index = obtain_index(c, corpus);
  std::vector<DocId> ids;
  if (!c.query_id.empty()) ids.push_back(c.query_id);
  const SetupConfig setup = make_setup(c, corpus, index, ids);
  std::string text = c.query_text;
  std::vector<double> qvec;
  if (!c.query_id.empty()) {
    const Document& doc = corpus.at(c.query_id);
    text = doc.abstract;
    if (setup.embeddings) {
      const auto v = setup.embeddings->queries->at(doc.id);
      qvec.assign(v.begin(), v.end());
    }
  } else {
    text = preprocess_text(text);
    if (setup.embeddings) qvec = hashed_embedding(index, text, c.dim, c.embed_seed);
  }
  RankedList ranked = recommend(index, setup, tokenize(text), qvec);
  ranked.query_id = c.query_id;
  const nlohmann::ordered_json j = {{"query_id", c.query_id},
                                    {"mode", std::string(mode_name(c.mode))},
                                    {"ranking", ranking_json(ranked)}};
  if (c.out_path.empty()) {
    out << j.dump(2) << '\n';
  } else {
    write_atomically(c.out_path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  }
}

RunResult produce_run(const CliConfig& c, const Corpus& corpus) {
  const SplitSpec split = read_split_file(c, corpus);
  const Bm25Index index = obtain_index(c, corpus);
  const std::vector<DocId> test_ids(split.test_query_ids.begin(), split.test_query_ids.end());
  const SetupConfig setup = make_setup(c, corpus, index, test_ids);
  return run_setup(corpus, split, index, setup, RunOptions{c.threads});
}

void do_run(const CliConfig& c, std::ostream& out) {
  const Corpus corpus = read_corpus(c);
  const RunResult run = produce_run(c, corpus);
  write_atomically(c.out_path, [&](std::ostream& os) { write_run(run, os); });
  out << "ranked_queries=" << run.rankings.size() << " mode=" << mode_name(run.config.mode)
      << '\n';
}

void do_evaluate(const CliConfig& c, std::ostream& out) {
  const Corpus corpus = read_corpus(c);
  RunResult run;
  if (!c.run_path.empty()) {
    auto in = open_input(c.run_path);
    run = read_run(in);
  } else {
    run = produce_run(c, corpus);
  }
  const EvalReport report = evaluate_run(run, corpus.graph(), c.k, c.ap_normalization);
  write_atomically(c.out_path, [&](std::ostream& os) { write_report(report, os); });
  std::ostringstream line;
  line.setf(std::ios::fixed);
  line.precision(4);
  line << "queries=" << report.n_queries << " MAP@" << report.k << '=' << report.map
       << " Recall@" << report.k << '=' << report.recall << " MRR@" << report.k << '='
       << report.mrr;
  out << line.str() << '\n';
}

void do_export_triplets(const CliConfig& c, std::ostream& out) {
  const Corpus corpus = read_corpus(c);
  const SplitSpec split = read_split_file(c, corpus);
  std::optional<Bm25Index> index;
  if (c.strategy == NegativeStrategy::kBm25Hard) index = obtain_index(c, corpus);
  TripletOptions options;
  options.strategy = c.strategy;
  options.negatives_per_positive = c.negatives;
  options.seed = c.seed;
  const auto triplets = sample_triplets(corpus, split, options, index ? &*index : nullptr);
  std::size_t n = 0;
  write_atomically(c.out_path,
                   [&](std::ostream& os) { n = export_triplets(triplets, corpus, os); });
  out << "triplets=" << n << " strategy=" << strategy_name(c.strategy) << '\n';
}

}  // namespace

int execute(const CliConfig& config, std::ostream& out, std::ostream& err) {
  try {
    validate_paths(config);
    switch (config.command) {
      case Command::kIngest: do_ingest(config, out); break;
      case Command::kSplit: do_split(config, out); break;
      case Command::kIndex: do_index(config, out); break;
      case Command::kEmbed: do_embed(config, out); break;
      case Command::kQuery: do_query(config, out); break;
      case Command::kRun: do_run(config, out); break;
      case Command::kEvaluate: do_evaluate(config, out); break;
      case Command::kExportTriplets: do_export_triplets(config, out); break;
    }
  } catch (const std::exception& e) {
    err << "citerec: error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig config;
  try {
    config = parse_args(args);
  } catch (const HelpRequested& help) {
    out << help.what();
    return kExitOk;
  } catch (const UsageError& e) {
    err << "citerec: usage error: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  }
  return execute(config, out, err);
}

}  // namespace citerec::cli
