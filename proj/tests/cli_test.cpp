#include "cli.hpp"

#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "citerec/embed.hpp"
#include "json.hpp"
#include "support/synthetic.hpp"
#include "support/test_util.hpp"

namespace citerec::cli {
namespace {

using citerec::testing::slurp;
using citerec::testing::TempDir;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(ParseArgs, EvaluateDefaults) {
  const CliConfig c = parse_args({"evaluate", "--mode", "bm25_only", "--k", "10", "--corpus",
                                  "c.json", "--split", "s.json", "--out", "r.json"});
  EXPECT_EQ(c.command, Command::kEvaluate);
  EXPECT_EQ(c.k, 10u);
  EXPECT_EQ(c.prefetch_k, 10u);
  EXPECT_EQ(c.mode, Mode::kBm25Only);
  EXPECT_EQ(c.bm25, (Bm25Params{1.5, 0.75, 1.0}));
  EXPECT_EQ(c.ratio, 0.7);
}

TEST(ParseArgs, UsageErrors) {
  EXPECT_THROW(parse_args({"split", "--ratio", "1.5", "--corpus", "c", "--out", "o"}), UsageError);
  EXPECT_THROW(parse_args({"split", "--ratio", "0", "--corpus", "c", "--out", "o"}), UsageError);
  EXPECT_THROW(parse_args({"run", "--mode", "dense_full", "--corpus", "c", "--split", "s", "--out",
                           "o"}),
               UsageError);
  EXPECT_THROW(parse_args({"run", "--mode", "bogus", "--corpus", "c", "--split", "s", "--out", "o"}),
               UsageError);
  EXPECT_THROW(parse_args({"run", "--k", "10", "--prefetch-k", "5", "--corpus", "c", "--split",
                           "s", "--out", "o"}),
               UsageError);
  EXPECT_THROW(parse_args({"run", "--corpus", "c", "--split", "s"}), UsageError);
  EXPECT_THROW(parse_args({"index", "--corpus", "c", "--out", "o", "--b", "2"}), UsageError);
  EXPECT_THROW(parse_args({"evaluate", "--corpus", "c", "--out", "o"}), UsageError);
  EXPECT_THROW(parse_args({}), UsageError);
  EXPECT_THROW(parse_args({"frobnicate"}), UsageError);
}

TEST(ParseArgs, UsageErrorNamesFlag) {
  try {
    parse_args({"split", "--ratio", "1.5", "--corpus", "c", "--out", "o"});
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("--ratio"), std::string::npos);
  }
}

TEST(RunCli, HelpOnEveryCommand) {
  for (const auto* cmd : {"ingest", "split", "index", "embed", "query", "run", "evaluate",
                          "export-triplets"}) {
    const Outcome o = run({cmd, "--help"});
    EXPECT_EQ(o.code, kExitOk) << cmd;
    EXPECT_NE(o.out.find("--out"), std::string::npos) << cmd;
  }
  const Outcome top = run({"--help"});
  EXPECT_EQ(top.code, kExitOk);
  EXPECT_NE(top.out.find("export-triplets"), std::string::npos);
  const Outcome split = run({"split", "--help"});
  EXPECT_NE(split.out.find("[0.7]"), std::string::npos);
  EXPECT_EQ(run({"split", "--ratio", "1.5", "--corpus", "c", "--out", "o"}).code, kExitUsage);
}

class CliWorkflow : public ::testing::Test {
 protected:
  void SetUp() override {
    corpus_ = synth::random_corpus({.candidates = 30, .queries = 20}, 11);
    synth::write_jsonl(corpus_, dir_.file("docs.jsonl"), dir_.file("cites.jsonl"));
  }

  Outcome ingest() {
    return run({"ingest", "--documents", dir_.file("docs.jsonl"), "--citations",
                dir_.file("cites.jsonl"), "--out", dir_.file("corpus.json")});
  }

  Corpus corpus_;
  TempDir dir_;
};

TEST_F(CliWorkflow, EndToEnd) {
  const Outcome ing = ingest();
  ASSERT_EQ(ing.code, kExitOk) << ing.err;
  EXPECT_EQ(ing.out, "documents=50 candidates=30 queries=20 edges=" +
                         std::to_string(corpus_.graph().edge_count()) + "\n");

  ASSERT_EQ(run({"split", "--corpus", dir_.file("corpus.json"), "--seed", "42", "--out",
                 dir_.file("split.json")})
                .code,
            kExitOk);
  EXPECT_EQ(run({"index", "--corpus", dir_.file("corpus.json"), "--out", dir_.file("index.bin")}).code,
            kExitOk);
  const Outcome r = run({"run", "--corpus", dir_.file("corpus.json"), "--split",
                         dir_.file("split.json"), "--index", dir_.file("index.bin"), "--out",
                         dir_.file("run.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Outcome e = run({"evaluate", "--corpus", dir_.file("corpus.json"), "--run",
                         dir_.file("run.json"), "--out", dir_.file("report.json")});
  ASSERT_EQ(e.code, kExitOk) << e.err;
  const auto report = nlohmann::json::parse(slurp(dir_.file("report.json")));
  EXPECT_EQ(report["n_queries"], 6);  // 20 queries, 70 % train
  EXPECT_EQ(report["config"]["mode"], "bm25_only");

  // Evaluating directly from the ranking flags gives the same report.
  const Outcome direct = run({"evaluate", "--corpus", dir_.file("corpus.json"), "--split",
                              dir_.file("split.json"), "--out", dir_.file("report2.json")});
  ASSERT_EQ(direct.code, kExitOk) << direct.err;
  EXPECT_EQ(slurp(dir_.file("report.json")), slurp(dir_.file("report2.json")));
}

TEST_F(CliWorkflow, FallbackEmbeddingsAndEmbedFile) {
  ASSERT_EQ(ingest().code, kExitOk);
  ASSERT_EQ(run({"split", "--corpus", dir_.file("corpus.json"), "--out", dir_.file("split.json")}).code,
            kExitOk);
  // Random queries may contain only out-of-vocabulary words, so embed candidates only.
  const Outcome emb = run({"embed", "--corpus", dir_.file("corpus.json"), "--role", "candidate",
                           "--dim", "16", "--out", dir_.file("cand.jsonl")});
  ASSERT_EQ(emb.code, kExitOk) << emb.err;
  std::ifstream in(dir_.file("cand.jsonl"));
  const EmbeddingStore store = load_embeddings(in);
  EXPECT_EQ(store.size(), 30u);
  EXPECT_EQ(store.dim(), 16u);

  const Outcome q = run({"query", "--corpus", dir_.file("corpus.json"), "--text", "t1 t2 t3",
                         "--mode", "prefetch_rerank", "--fallback-embeddings", "--k", "3"});
  ASSERT_EQ(q.code, kExitOk) << q.err;
  const auto ranking = nlohmann::json::parse(q.out);
  EXPECT_EQ(ranking["ranking"].size(), 3u);
}

TEST_F(CliWorkflow, ExternalEmbeddingFiles) {
  ASSERT_EQ(ingest().code, kExitOk);
  ASSERT_EQ(run({"split", "--corpus", dir_.file("corpus.json"), "--out", dir_.file("split.json")}).code,
            kExitOk);
  {
    std::ofstream docs(dir_.file("d.jsonl"));
    write_embeddings(synth::random_unit_embeddings(corpus_.candidate_ids(), 8, 1), docs);
    std::ofstream queries(dir_.file("q.jsonl"));
    write_embeddings(synth::random_unit_embeddings(corpus_.query_ids(), 8, 2), queries);
  }
  const Outcome e = run({"evaluate", "--corpus", dir_.file("corpus.json"), "--split",
                         dir_.file("split.json"), "--mode", "dense_full", "--doc-embeddings",
                         dir_.file("d.jsonl"), "--query-embeddings", dir_.file("q.jsonl"), "--out",
                         dir_.file("report.json")});
  ASSERT_EQ(e.code, kExitOk) << e.err;
  const auto report = nlohmann::json::parse(slurp(dir_.file("report.json")));
  EXPECT_EQ(report["config"]["mode"], "dense_full");
  EXPECT_TRUE(report["config"]["embeddings"].is_string());
}

TEST_F(CliWorkflow, ExportTriplets) {
  ASSERT_EQ(ingest().code, kExitOk);
  ASSERT_EQ(run({"split", "--corpus", dir_.file("corpus.json"), "--out", dir_.file("split.json")}).code,
            kExitOk);
  for (const auto* strategy : {"random", "bm25_hard"}) {
    const Outcome t = run({"export-triplets", "--corpus", dir_.file("corpus.json"), "--split",
                           dir_.file("split.json"), "--strategy", strategy, "--out",
                           dir_.file("t.jsonl")});
    ASSERT_EQ(t.code, kExitOk) << t.err;
    EXPECT_NE(t.out.find("triplets="), std::string::npos);
  }
}

TEST_F(CliWorkflow, ErrorsLeaveNoPartialOutput) {
  ASSERT_EQ(ingest().code, kExitOk);
  ASSERT_EQ(run({"split", "--corpus", dir_.file("corpus.json"), "--out", dir_.file("split.json")}).code,
            kExitOk);
  const std::string bad_out = dir_.file("missing-dir/report.json");
  const Outcome e = run({"evaluate", "--corpus", dir_.file("corpus.json"), "--split",
                         dir_.file("split.json"), "--out", bad_out});
  EXPECT_EQ(e.code, kExitError);
  EXPECT_FALSE(std::filesystem::exists(bad_out));

  // A failure after work has started: the embeddings file lacks query vectors.
  {
    std::ofstream docs(dir_.file("d.jsonl"));
    write_embeddings(synth::random_unit_embeddings(corpus_.candidate_ids(), 4, 1), docs);
  }
  const Outcome r = run({"run", "--corpus", dir_.file("corpus.json"), "--split",
                         dir_.file("split.json"), "--mode", "dense_full", "--doc-embeddings",
                         dir_.file("d.jsonl"), "--query-embeddings", dir_.file("d.jsonl"), "--out",
                         dir_.file("run.json")});
  EXPECT_EQ(r.code, kExitError);
  EXPECT_NE(r.err.find("MissingEmbedding"), std::string::npos);
  EXPECT_FALSE(std::filesystem::exists(dir_.file("run.json")));
  EXPECT_FALSE(std::filesystem::exists(dir_.file("run.json.partial")));

  const Outcome missing = run({"split", "--corpus", dir_.file("nope.json"), "--out",
                               dir_.file("s2.json")});
  EXPECT_EQ(missing.code, kExitError);
}

TEST_F(CliWorkflow, RerunsAreByteIdentical) {
  ASSERT_EQ(ingest().code, kExitOk);
  const std::string first = slurp(dir_.file("corpus.json"));
  ASSERT_EQ(ingest().code, kExitOk);
  EXPECT_EQ(slurp(dir_.file("corpus.json")), first);
  for (int i = 0; i < 2; ++i) {
    ASSERT_EQ(run({"index", "--corpus", dir_.file("corpus.json"), "--out",
                   dir_.file("index" + std::to_string(i) + ".bin")})
                  .code,
              kExitOk);
  }
  EXPECT_EQ(slurp(dir_.file("index0.bin")), slurp(dir_.file("index1.bin")));
}

}  // namespace
}  // namespace citerec::cli
