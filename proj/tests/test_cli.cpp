#include <gtest/gtest.h>

#include <sstream>

#include "testing.hpp"
#include "xner/alignment.hpp"
#include "xner/cli.hpp"
#include "xner/corpus.hpp"
#include "xner/translation.hpp"

using namespace xner;
using testutil::slurp;
using testutil::spit;
using testutil::TempDir;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// Small synthetic benchmark shared by the pipeline tests.
class CliPipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    const Result r = run({"synth", "--out-dir", dir.file("d"), "--vocab", "300", "--dim", "20", "--train-sentences",
                          "60", "--test-sentences", "30", "--seed-pairs", "60"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  std::string d(const std::string& name) const { return dir.file("d/" + name); }
  Result align(const std::string& out, std::vector<std::string> extra = {}) const {
    std::vector<std::string> a = {"align", "--src-emb", d("src.vec"), "--tgt-emb", d("tgt.vec"), "--seed-dict",
                                  d("seed.dict"), "--out", out};
    a.insert(a.end(), extra.begin(), extra.end());
    return run(a);
  }
  TempDir dir;
};

}  // namespace

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"nonsense"}).code, 1);
  Result r = run({"align", "--src-emb", "x"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("required"), std::string::npos);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, MissingFileExitsTwo) {
  TempDir dir;
  Result r = run({"evaluate", "--gold", dir.file("nope.conll"), "--pred", dir.file("nope.conll")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nope.conll"), std::string::npos);
}

TEST(Cli, EvaluateSelfComparison) {
  TempDir dir;
  spit(dir.file("g.conll"), "EU B-ORG\nrejects O\n\nPeter B-PER\nBlackburn I-PER\n");
  Result r = run({"evaluate", "--gold", dir.file("g.conll"), "--pred", dir.file("g.conll"), "--format", "kv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\nf1=1"), std::string::npos);
  EXPECT_NE(r.out.find("# seed=1"), std::string::npos);
  EXPECT_NE(r.out.find("# config_hash="), std::string::npos);
}

TEST(Cli, GradcheckPasses) {
  Result r = run({"gradcheck", "--seed", "3"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("tagger_nll"), std::string::npos);
}

TEST_F(CliPipeline, AlignWritesOrthogonalModelAndRoundSizes) {
  Result r = align(dir.file("a.model"));
  ASSERT_EQ(r.code, 0) << r.err;
  for (int k = 0; k <= 3; ++k) EXPECT_NE(r.err.find("round=" + std::to_string(k) + " "), std::string::npos);
  AlignmentModel m = load_alignment(dir.file("a.model"));
  EXPECT_LT(orthogonality_error(m.w), 1e-6);
  EXPECT_EQ(m.round, 3u);
  const std::string text = slurp(dir.file("a.model"));
  EXPECT_NE(text.find("# seed=1"), std::string::npos);
  EXPECT_NE(text.find("# config_hash="), std::string::npos);
}

TEST_F(CliPipeline, ZeroRoundsMarkedRoundZero) {
  ASSERT_EQ(align(dir.file("a0.model"), {"--k", "0"}).code, 0);
  EXPECT_EQ(load_alignment(dir.file("a0.model")).round, 0u);
  EXPECT_NE(slurp(dir.file("a0.model")).find("\nround 0\n"), std::string::npos);
}

TEST_F(CliPipeline, IdenticalSeedOnDisjointVocabulariesFails) {
  Result r = run({"align", "--src-emb", d("src.vec"), "--tgt-emb", d("tgt.vec"), "--seed-dict", "identical", "--out",
                  dir.file("x.model")});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("identical"), std::string::npos);
}

TEST_F(CliPipeline, TranslatePreservesTokenCountsAndTags) {
  ASSERT_EQ(align(dir.file("a.model")).code, 0);
  Result r = run({"translate", "--corpus", d("train.conll"), "--out", dir.file("t.conll"), "--align",
                  dir.file("a.model"), "--src-emb", d("src.vec"), "--tgt-emb", d("tgt.vec"), "--table-out",
                  dir.file("table.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  LabeledCorpus in = read_conll(d("train.conll")), out = read_conll(dir.file("t.conll"));
  ASSERT_EQ(in.size(), out.size());
  for (std::size_t s = 0; s < in.size(); ++s) {
    EXPECT_EQ(in.sentences[s].tags, out.sentences[s].tags);
    EXPECT_EQ(in.sentences[s].tokens.size(), out.sentences[s].tokens.size());
    EXPECT_NE(in.sentences[s].tokens, out.sentences[s].tokens);
  }
  EXPECT_NE(slurp(dir.file("t.conll.meta")).find("config_hash="), std::string::npos);
  EXPECT_EQ(slurp(dir.file("table.txt")).rfind("# xner translate", 0), 0u);
}

TEST_F(CliPipeline, CommonSpaceOutputIsByteIdentical) {
  ASSERT_EQ(align(dir.file("a.model")).code, 0);
  Result r = run({"translate", "--mode", "common-space", "--corpus", d("train.conll"), "--out", dir.file("c.conll"),
                  "--align", dir.file("a.model"), "--src-emb", d("src.vec"), "--tgt-emb", d("tgt.vec"), "--emb-out",
                  dir.file("c.vec")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir.file("c.conll")), slurp(d("train.conll")));
}

TEST_F(CliPipeline, SameFlagsSameBytesRegardlessOfThreads) {
  ASSERT_EQ(align(dir.file("a1.model")).code, 0);
  ASSERT_EQ(align(dir.file("a2.model"), {"--threads", "3"}).code, 0);
  EXPECT_EQ(slurp(dir.file("a1.model")), slurp(dir.file("a2.model")));
  std::vector<std::string> train = {"train", "--train", d("train.conll"), "--emb", d("tgt.vec"), "--epochs", "1",
                                    "--char-hidden", "4", "--char-emb-dim", "4", "--word-hidden", "8"};
  auto t1 = train, t2 = train;
  t1.insert(t1.end(), {"--out", dir.file("m1.ckpt")});
  t2.insert(t2.end(), {"--out", dir.file("m2.ckpt"), "--threads", "2"});
  ASSERT_EQ(run(t1).code, 0);
  ASSERT_EQ(run(t2).code, 0);
  EXPECT_EQ(slurp(dir.file("m1.ckpt")), slurp(dir.file("m2.ckpt")));
}

TEST_F(CliPipeline, ConfigFileIsOverriddenByFlags) {
  spit(dir.file("run.cfg"), "# pipeline settings\nk = 2\ncsls_k=5\nepochs=7\n");
  Result r = align(dir.file("a.model"), {"--config", dir.file("run.cfg"), "--k", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_alignment(dir.file("a.model")).round, 1u);
  EXPECT_NE(r.err.find("'epochs' is not used by align"), std::string::npos);
  Result r2 = align(dir.file("b.model"), {"--config", dir.file("run.cfg")});
  ASSERT_EQ(r2.code, 0);
  EXPECT_EQ(load_alignment(dir.file("b.model")).round, 2u);
  spit(dir.file("bad.cfg"), "no equals sign\n");
  EXPECT_EQ(align(dir.file("c.model"), {"--config", dir.file("bad.cfg")}).code, 1);
}

TEST_F(CliPipeline, CapsStatsDriveCapitalization) {
  TempDir t;
  spit(t.file("mono.txt"), "Haus haus Haus\nHaus der\n");
  ASSERT_EQ(run({"caps-stats", "--corpus", t.file("mono.txt"), "--out", t.file("caps.txt")}).code, 0);
  spit(t.file("lex.txt"), "house haus 0.9\nthe der 0.9\n");
  spit(t.file("in.conll"), "the O\nhouse O\n");
  ASSERT_EQ(run({"translate", "--corpus", t.file("in.conll"), "--out", t.file("out.conll"), "--lexicon",
                 t.file("lex.txt"), "--caps-stats", t.file("caps.txt"), "--caps-threshold", "0.6"})
                .code,
            0);
  EXPECT_EQ(slurp(t.file("out.conll")), "der O\nHaus O\n\n");
  ASSERT_EQ(run({"translate", "--corpus", t.file("in.conll"), "--out", t.file("plain.conll"), "--lexicon",
                 t.file("lex.txt")})
                .code,
            0);
  EXPECT_EQ(slurp(t.file("plain.conll")), "der O\nhaus O\n\n");
}

TEST_F(CliPipeline, TagAndEvaluateEndToEnd) {
  ASSERT_EQ(align(dir.file("a.model")).code, 0);
  ASSERT_EQ(run({"translate", "--corpus", d("train.conll"), "--out", dir.file("t.conll"), "--align",
                 dir.file("a.model"), "--src-emb", d("src.vec"), "--tgt-emb", d("tgt.vec")})
                .code,
            0);
  Result tr = run({"train", "--train", dir.file("t.conll"), "--emb", d("tgt.vec"), "--out", dir.file("m.ckpt"),
                   "--epochs", "2", "--char-hidden", "4", "--char-emb-dim", "4", "--word-hidden", "8", "--log",
                   dir.file("train.log")});
  ASSERT_EQ(tr.code, 0) << tr.err;
  EXPECT_NE(slurp(dir.file("train.log")).find("epoch=2"), std::string::npos);
  EXPECT_NE(slurp(dir.file("m.ckpt")).find("# config_hash="), std::string::npos);
  Result tg = run({"tag", "--model", dir.file("m.ckpt"), "--input", d("test.conll"), "--emb", d("tgt.vec"), "--out",
                   dir.file("p.conll")});
  ASSERT_EQ(tg.code, 0) << tg.err;
  EXPECT_EQ(read_conll(dir.file("p.conll")).token_count(), read_conll(d("test.conll")).token_count());
  Result ev = run({"evaluate", "--gold", d("test.conll"), "--pred", dir.file("p.conll")});
  EXPECT_EQ(ev.code, 0);
  EXPECT_NE(ev.out.find("overall"), std::string::npos);
  Result txt = run({"tag", "--model", dir.file("m.ckpt"), "--input", d("tgt.txt"), "--format", "text", "--emb",
                    d("tgt.vec"), "--out", dir.file("q.conll")});
  EXPECT_EQ(txt.code, 0) << txt.err;
}

TEST_F(CliPipeline, BadConfigValuesExitOne) {
  Result r = run({"train", "--train", d("train.conll"), "--emb", d("tgt.vec"), "--out", dir.file("m.ckpt"),
                  "--batch-size", "0"});
  EXPECT_EQ(r.code, 1);
  Result m = run({"translate", "--mode", "sideways", "--corpus", d("train.conll"), "--out", dir.file("x")});
  EXPECT_EQ(m.code, 1);
}
