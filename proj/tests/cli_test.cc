// Copyright 2026 The catdesk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "catdesk/config.h"
#include "catdesk/fst_io.h"
#include "catdesk/lm.h"
#include "catdesk/topology.h"
#include "cli.h"
#include "oracles.h"

namespace catdesk {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::initializer_list<std::string> args, const std::string& stdin_text = "") {
  std::vector<std::string> owned{"catdesk"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), in, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("catdesk_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

TEST(Config, Defaults) {
  const RunConfig c;
  EXPECT_EQ(c.get_double("alpha"), 0.01);
  EXPECT_EQ(c.get_double("lambda"), 0.005);
  EXPECT_EQ(c.get_int("chunk_size"), 40);
  EXPECT_EQ(c.get_int("left_context"), 10);
  EXPECT_EQ(c.get_int("right_context"), 10);
  EXPECT_EQ(c.get("decoder"), "greedy");
}

TEST(Config, RejectsUnknownKeys) {
  RunConfig c;
  EXPECT_THROW(c.set("chunksize", "3"), Error);
  try {
    c.load_text("alpha = 0.1\nbogus = 2\n", "x.cfg");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("x.cfg:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(c.load_text("alpha 0.1\n", "x.cfg"), ParseError);
}

TEST(Config, TypedAccessorsValidate) {
  RunConfig c;
  c.set("epochs", "3x");
  EXPECT_THROW(c.get_int("epochs"), Error);
  c.set("seed", "-1");
  EXPECT_THROW(c.get_u64("seed"), Error);
}

TEST_F(CliTest, PrecedenceFileEnvFlag) {
  const std::string cfg = path("run.cfg");
  std::ofstream(cfg) << "# chunked streaming\nchunk_size = 5\nright_context = 3\nleft_context = 2\n";
  ASSERT_EQ(run_cli({"synth", "--out_dir", path("c"), "--num_utts", "12"}).code, cli::kExitOk);
  ASSERT_EQ(run_cli({"train", "--corpus_dir", path("c"), "--model_path", path("m.ckpt"), "--loss", "ctc",
                     "--epochs", "1", "--d_h", "3"})
                .code,
            cli::kExitOk);
  const std::string frames = "0 0\n1 1\n0 1\n1 0\n0 0\n1 1\n0 1\n1 0\n";

  Outcome r = run_cli({"stream-demo", "--model_path", path("m.ckpt"), "--config", cfg}, frames);
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("bound 8 "), std::string::npos) << r.out;

  setenv("CATDESK_CHUNK_SIZE", "6", 1);
  r = run_cli({"stream-demo", "--model_path", path("m.ckpt"), "--config", cfg}, frames);
  EXPECT_NE(r.out.find("bound 9 "), std::string::npos) << r.out;
  r = run_cli({"stream-demo", "--model_path", path("m.ckpt"), "--config", cfg, "--chunk-size", "7"}, frames);
  unsetenv("CATDESK_CHUNK_SIZE");
  EXPECT_NE(r.out.find("bound 10 "), std::string::npos) << r.out;
}

TEST_F(CliTest, UnknownFlagIsUsageError) {
  EXPECT_EQ(run_cli({"synth", "--out_dir", path("c"), "--chunksize", "3"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
}

TEST_F(CliTest, HelpExitsZero) {
  const Outcome r = run_cli({"train", "--help"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_NE(r.out.find("--teacher_path"), std::string::npos);
}

TEST_F(CliTest, SynthWritesSplitsDeterministically) {
  const Outcome r = run_cli({"synth", "--out_dir", path("a")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  ASSERT_EQ(run_cli({"synth", "--out_dir", path("b")}).code, cli::kExitOk);
  for (const char* split : {"train", "dev", "test"}) {
    for (const char* file : {"feats.bin", "text"}) {
      const fs::path a = dir_ / "a" / split / file;
      ASSERT_TRUE(fs::exists(a)) << a;
      EXPECT_EQ(slurp(a), slurp(dir_ / "b" / split / file)) << a;
    }
  }
  ASSERT_EQ(run_cli({"synth", "--out_dir", path("s2"), "--seed", "2"}).code, cli::kExitOk);
  EXPECT_NE(slurp(dir_ / "a" / "train" / "feats.bin"), slurp(dir_ / "s2" / "train" / "feats.bin"));
}

TEST_F(CliTest, SynthWithoutOutDirIsUsageError) {
  const Outcome r = run_cli({"synth"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("--out_dir"), std::string::npos) << r.err;
}

TEST_F(CliTest, TrainCtcNeedsNoLmArtifacts) {
  ASSERT_EQ(run_cli({"synth", "--out_dir", path("c"), "--num_utts", "16"}).code, cli::kExitOk);
  const Outcome r = run_cli({"train", "--corpus_dir", path("c"), "--model_path", path("m.ckpt"), "--loss", "ctc",
                             "--epochs", "2", "--d_h", "4"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(path("m.ckpt")));
  EXPECT_NE(r.out.find("train: best epoch"), std::string::npos) << r.out;
}

TEST_F(CliTest, TrainCrfWithoutDenominatorExplainsFix) {
  ASSERT_EQ(run_cli({"synth", "--out_dir", path("c"), "--num_utts", "16"}).code, cli::kExitOk);
  const Outcome r = run_cli({"train", "--corpus_dir", path("c"), "--model_path", path("m.ckpt")});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("build-den"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("--den_path"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("m.ckpt")));
}

TEST_F(CliTest, ChunkedTrainingNeedsTeacher) {
  ASSERT_EQ(run_cli({"synth", "--out_dir", path("c"), "--num_utts", "16"}).code, cli::kExitOk);
  const Outcome r = run_cli(
      {"train", "--corpus_dir", path("c"), "--model_path", path("m.ckpt"), "--loss", "ctc", "--mode", "csf"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("--teacher_path"), std::string::npos) << r.err;
  EXPECT_EQ(run_cli({"train", "--corpus_dir", path("c"), "--model_path", path("m.ckpt"), "--mode", "chunky"}).code,
            cli::kExitUsage);
}

TEST_F(CliTest, ScoreIdenticalIsZero) {
  std::ofstream(path("ref")) << "u1 a b c\nu2 b a\n";
  std::ofstream(path("hyp")) << "u1\t-1.5\ta b c\nu2\t-2\tb a\n";
  Outcome r = run_cli({"score", "--ref_path", path("ref"), "--hyp_path", path("ref")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind("PER 0.000", 0), 0u) << r.out;
  r = run_cli({"score", "--ref_path", path("ref"), "--hyp_path", path("hyp")});
  EXPECT_EQ(r.out.rfind("PER 0.000", 0), 0u) << r.out;
  std::ofstream(path("hyp2")) << "u1 a c\nu2 b a\n";
  r = run_cli({"score", "--ref_path", path("ref"), "--hyp_path", path("hyp2")});
  EXPECT_EQ(r.out.rfind("PER 20.000 S 0 I 0 D 1", 0), 0u) << r.out;
  EXPECT_EQ(run_cli({"score", "--ref_path", path("missing"), "--hyp_path", path("ref")}).code, cli::kExitFailure);
}

// The graph written by build-den, read back from text, scores each label
// string with the all-paths LM probability.
TEST_F(CliTest, BuildDenMatchesLmOracle) {
  ASSERT_EQ(run_cli({"synth", "--out_dir", path("c"), "--alphabet", "2", "--num_utts", "40"}).code, cli::kExitOk);
  ASSERT_EQ(run_cli({"train-lm", "--corpus_dir", path("c"), "--lm_path", path("lm.arpa")}).code, cli::kExitOk);
  const Outcome r =
      run_cli({"build-den", "--corpus_dir", path("c"), "--lm_path", path("lm.arpa"), "--den_path", path("den.fst")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const NGramLm lm = read_arpa_file(path("lm.arpa"));
  const SymbolTable sy = SymbolTable::read_file(path("c/labels.txt"));
  const Wfst den = read_fst_file(path("den.fst"));
  int checked = 0;
  for (const auto& s : enumerate_language(den, 4)) {
    EXPECT_NEAR(s.weight, oracle::ngram_all_paths(lm, to_symbols(oracle::collapse(s.input), sy)), 1e-9);
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST_F(CliTest, EndToEndDecode) {
  ASSERT_EQ(run_cli({"synth", "--out_dir", path("c"), "--num_utts", "60"}).code, cli::kExitOk);
  ASSERT_EQ(run_cli({"train-lm", "--corpus_dir", path("c"), "--lm_path", path("lm.arpa")}).code, cli::kExitOk);
  ASSERT_EQ(run_cli({"build-den", "--corpus_dir", path("c"), "--lm_path", path("lm.arpa"), "--den_path",
                     path("den.fst")})
                .code,
            cli::kExitOk);
  Outcome r = run_cli({"train", "--corpus_dir", path("c"), "--model_path", path("m.ckpt"), "--den_path",
                       path("den.fst"), "--epochs", "3", "--log_path", path("train.log")});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("--lm_path"), std::string::npos) << r.err;
  r = run_cli({"train", "--corpus_dir", path("c"), "--model_path", path("m.ckpt"), "--den_path", path("den.fst"),
               "--lm_path", path("lm.arpa"), "--epochs", "3", "--log_path", path("train.log")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  // epoch, mean loss, dev PER; CRF loss plus the CTC term is never negative.
  std::istringstream log(slurp(path("train.log")));
  int epochs = 0;
  for (int epoch; log >> epoch;) {
    double loss, per;
    ASSERT_TRUE(log >> loss >> per);
    EXPECT_EQ(epoch, ++epochs);
    EXPECT_GE(loss, 0.0);
  }
  EXPECT_EQ(epochs, 3);
  for (const char* decoder : {"greedy", "graph"}) {
    r = run_cli({"decode", "--corpus_dir", path("c"), "--model_path", path("m.ckpt"), "--den_path", path("den.fst"),
                 "--decoder", decoder, "--hyp_path", path("hyp")});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    r = run_cli({"score", "--ref_path", path("c/test/text"), "--hyp_path", path("hyp")});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_EQ(r.out.rfind("PER ", 0), 0u);
    EXPECT_TRUE(r.err.empty()) << r.err;
  }
  r = run_cli({"decode", "--corpus_dir", path("c"), "--model_path", path("m.ckpt"), "--decoder", "graph"});
  EXPECT_EQ(r.code, cli::kExitUsage);
}

TEST_F(CliTest, StreamDemoReportsLagAndLatency) {
  ASSERT_EQ(run_cli({"synth", "--out_dir", path("c"), "--num_utts", "12"}).code, cli::kExitOk);
  ASSERT_EQ(run_cli({"train", "--corpus_dir", path("c"), "--model_path", path("m.ckpt"), "--loss", "ctc",
                     "--epochs", "1", "--d_h", "3"})
                .code,
            cli::kExitOk);
  std::string frames;
  for (int t = 0; t < 123; ++t) frames += std::to_string(t % 3) + " " + std::to_string(0.5 * (t % 2)) + "\n";
  const Outcome r = run_cli({"stream-demo", "--model_path", path("m.ckpt")}, frames);
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::istringstream lines(r.out);
  std::string line, summary;
  int rows = 0;
  while (std::getline(lines, line)) {
    if (line[0] == '#') {
      summary = line;
      continue;
    }
    std::istringstream fields(line);
    int idx, lag;
    fields >> idx >> lag;
    EXPECT_EQ(idx, rows++);
    EXPECT_LE(lag, 50);
  }
  EXPECT_EQ(rows, 123);
  std::istringstream s(summary);
  std::string hash, k1, k2, k3, k4;
  int frames_n, max_lag, bound;
  double latency;
  s >> hash >> k1 >> frames_n >> k2 >> max_lag >> k3 >> bound >> k4 >> latency;
  EXPECT_EQ(frames_n, 123);
  EXPECT_LE(max_lag, bound);
  EXPECT_EQ(bound, 50);
  EXPECT_DOUBLE_EQ(latency, 300.0);

  EXPECT_EQ(run_cli({"stream-demo", "--model_path", path("m.ckpt")}, "1 2 3\n").code, cli::kExitFailure);
  EXPECT_EQ(run_cli({"stream-demo", "--model_path", path("m.ckpt")}, "1 x\n").code, cli::kExitFailure);
}

}  // namespace
}  // namespace catdesk
