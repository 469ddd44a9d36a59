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

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "catdesk/lm.h"
#include "catdesk/topology.h"
#include "oracles.h"

namespace catdesk {
namespace {

constexpr Label blk = kBlank, a = 2, b = 3;
const double kLn10 = std::log(10.0);

using Words = std::vector<std::string>;

NGramLm fixture() { return read_arpa_file(std::string(CATDESK_TEST_DATA) + "/bigram.arpa"); }

NGramLm random_lm(std::mt19937_64& rng, int order, const Words& vocab) {
  std::vector<Words> corpus;
  const int n = std::uniform_int_distribution<int>(1, 6)(rng);
  for (int i = 0; i < n; ++i) {
    Words s;
    const int len = std::uniform_int_distribution<int>(0, 4)(rng);
    for (int j = 0; j < len; ++j) s.push_back(vocab[rng() % vocab.size()]);
    corpus.push_back(s);
  }
  return estimate_ngram(corpus, order, vocab);
}

// Corpus {a, a, b}: counts a=2, b=1, </s>=3 over 6 tokens with 3 distinct
// types; Witten-Bell against uniform 1/3 gives (c + 3 * 1/3) / (6 + 3).
TEST(WittenBell, HandTableUnigram) {
  const NGramLm lm = estimate_ngram({{"a"}, {"a"}, {"b"}}, 1, {"a", "b"});
  const Words none;
  EXPECT_NEAR(lm.log_prob(none, "a"), std::log(3.0 / 9), 1e-12);
  EXPECT_NEAR(lm.log_prob(none, "b"), std::log(2.0 / 9), 1e-12);
  EXPECT_NEAR(lm.log_prob(none, kSentenceEnd), std::log(4.0 / 9), 1e-12);
  EXPECT_NEAR(lm.find({kSentenceBegin})->log10_prob, -99.0, 0.0);
}

TEST(WittenBell, UnseenSymbolGetsLessMass) {
  const NGramLm lm = estimate_ngram({{"a"}}, 1, {"a", "b"});
  const Words none;
  EXPECT_GT(lm.log_prob(none, "a"), lm.log_prob(none, "b"));
  EXPECT_GT(lm.log_prob(none, "b"), kLogZero);
}

// Corpus {a b}: unigrams are 1/3 each; context a has c=1, T=1, so
// p(b|a) = (1 + 1/3) / 2 and p(a|a) = (1/3) / 2.
TEST(WittenBell, HandTableBigram) {
  const NGramLm lm = estimate_ngram({{"a", "b"}}, 2, {"a", "b"});
  const Words ha{"a"}, hs{kSentenceBegin};
  EXPECT_NEAR(lm.log_prob(ha, "b"), std::log(2.0 / 3), 1e-12);
  EXPECT_NEAR(lm.log_prob(ha, "a"), std::log(1.0 / 6), 1e-12);
  EXPECT_NEAR(lm.log_prob(hs, "a"), std::log(2.0 / 3), 1e-12);
  EXPECT_NEAR(lm.log_prob(hs, kSentenceEnd), std::log(1.0 / 6), 1e-12);
  EXPECT_GT(lm.log_prob(ha, "b"), lm.log_prob(ha, "a"));
}

TEST(WittenBell, Errors) {
  EXPECT_THROW(estimate_ngram({}, 2, {"a"}), Error);
  EXPECT_THROW(estimate_ngram({{"a"}}, 5, {"a"}), Error);
  EXPECT_THROW(estimate_ngram({{"a"}}, 0, {"a"}), Error);
  EXPECT_THROW(estimate_ngram({{"c"}}, 2, {"a"}), Error);
}

TEST(WittenBell, DeterministicAndPrefixClosed) {
  std::mt19937_64 r1(5), r2(5);
  const NGramLm x = random_lm(r1, 3, {"a", "b", "c"});
  const NGramLm y = random_lm(r2, 3, {"a", "b", "c"});
  EXPECT_TRUE(x == y);
  EXPECT_NO_THROW(x.validate());
}

// Every context distributes exactly its mass over the vocabulary and </s>.
TEST(WittenBell, ContextsAreNormalized) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const int order = std::uniform_int_distribution<int>(1, 4)(rng);
    const NGramLm lm = random_lm(rng, order, {"a", "b", "c"});
    for (const auto& h : lm_contexts(lm)) {
      const double m = context_mass(lm, h);
      ASSERT_GE(m, 1 - 1e-6) << "trial " << trial;
      ASSERT_LE(m, 1 + 1e-6) << "trial " << trial;
    }
  }
}

TEST(Arpa, FixtureHandSums) {
  const NGramLm lm = fixture();
  EXPECT_EQ(lm.order(), 2);
  // Explicit path <s> a b </s>.
  EXPECT_NEAR(sentence_logprob(lm, Words{"a", "b"}), (-0.30103 - 0.5228787 - 0.154902) * kLn10, 1e-9);
  // b a needs back-off for p(a | b): bo(b) + p(a).
  EXPECT_NEAR(sentence_logprob(lm, Words{"b", "a"}), (-0.39794 + (-0.2218487 - 0.39794) - 0.69897) * kLn10, 1e-9);
  // Empty sentence: p(</s> | <s>) = bo(<s>) + p(</s>).
  EXPECT_NEAR(sentence_logprob(lm, Words{}), (-0.30103 - 0.5228787) * kLn10, 1e-9);
  EXPECT_NEAR(sentence_logprob(lm, Words{"b", "a"}), oracle::ngram_backoff_score(lm, {"b", "a"}), 1e-12);
}

TEST(Arpa, OovNamesSymbol) {
  try {
    sentence_logprob(fixture(), Words{"a", "zz"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("zz"), std::string::npos);
  }
}

TEST(Arpa, RoundTrip) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    const int order = std::uniform_int_distribution<int>(1, 4)(rng);
    const NGramLm lm = random_lm(rng, order, {"a", "b", "c"});
    std::stringstream ss;
    write_arpa(lm, ss);
    const NGramLm back = read_arpa(ss);
    ASSERT_EQ(back.order(), lm.order());
    for (int n = 1; n <= order; ++n) {
      ASSERT_EQ(back.entries(n).size(), lm.entries(n).size());
      for (const auto& [g, e] : lm.entries(n)) {
        const NGramEntry* f = back.find(g);
        ASSERT_NE(f, nullptr);
        ASSERT_NEAR(f->log10_prob, e.log10_prob, 1e-6);
        ASSERT_NEAR(f->log10_backoff, e.log10_backoff, 1e-6);
      }
    }
  }
}

std::string read_text(const std::string& path) {
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int error_line(const std::string& arpa) {
  std::istringstream is(arpa);
  try {
    read_arpa(is);
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    const auto pos = msg.find("line ");
    return pos == std::string::npos ? -1 : std::stoi(msg.substr(pos + 5));
  }
  return 0;
}

TEST(Arpa, WrongCountIsParseError) {
  std::string text = read_text(std::string(CATDESK_TEST_DATA) + "/bigram.arpa");
  text.replace(text.find("ngram 2=5"), 9, "ngram 2=6");
  EXPECT_GT(error_line(text), 0);
}

TEST(Arpa, MalformedHeaderIsParseErrorWithLine) {
  std::string text = read_text(std::string(CATDESK_TEST_DATA) + "/bigram.arpa");
  text.replace(text.find("\\2-grams:"), 9, "\\2-gramz:");
  EXPECT_EQ(error_line(text), 12);
  EXPECT_GT(error_line("\\data\\\nngram 1=x\n"), 0);
}

TEST(LmFst, UnigramIsOneContext) {
  const NGramLm lm = estimate_ngram({{"a"}, {"b"}}, 1, {"a", "b"});
  const SymbolTable sy = make_label_symbols({"a", "b"});
  const Wfst f = lm_to_fst(lm, sy);
  EXPECT_EQ(f.num_states(), 1);
  EXPECT_EQ(f.num_arcs(), 2u);
  EXPECT_NEAR(f.final_weight(0), lm.log_prob(Words{}, kSentenceEnd), 1e-12);
}

TEST(LmFst, BestPathIsStandardScoreAndSumIsAllPaths) {
  const NGramLm lm = fixture();
  const SymbolTable sy = make_label_symbols({"a", "b"});
  const Wfst f = lm_to_fst(lm, sy);
  for (const Words& w : {Words{"a", "b"}, Words{"b", "a"}, Words{}, Words{"a", "a", "b"}}) {
    LabelSeq ids;
    for (const auto& s : w) ids.push_back(sy.id_of(s));
    const Wfst path = compose(linear_acceptor(ids), f);
    EXPECT_NEAR(shortest_path(path).total, sentence_logprob(lm, w), 1e-9);
    const auto lang = enumerate_language(path, 4);
    ASSERT_EQ(lang.size(), 1u);
    EXPECT_NEAR(lang[0].weight, oracle::ngram_all_paths(lm, w), 1e-9);
    EXPECT_NEAR(sentence_logprob_all_paths(lm, w), oracle::ngram_all_paths(lm, w), 1e-12);
    EXPECT_GE(lang[0].weight, sentence_logprob(lm, w));
  }
}

// b a: the explicit route has no (b, a) bigram, so the only paths leave b's
// context through the epsilon back-off arc.
TEST(LmFst, ForcedBackoffUsesEpsilonArc) {
  const NGramLm lm = fixture();
  const SymbolTable sy = make_label_symbols({"a", "b"});
  const Wfst path = trim(compose(linear_acceptor(LabelSeq{b, a}), lm_to_fst(lm, sy)));
  bool eps = false;
  for (StateId s = 0; s < path.num_states(); ++s)
    for (const Arc& arc : path.arcs(s)) eps |= arc.ilabel == kEpsilon;
  EXPECT_TRUE(eps);
  // <s> -> b explicit or backed off, then bo(b) + p(a), then </s> from a
  // (explicit, or backed off to the unigram).
  const double pb = std::log(std::pow(10, -0.39794) + std::pow(10, -0.30103 - 0.5228787));
  const double pa = (-0.2218487 - 0.39794) * kLn10;
  const double pe = std::log(std::pow(10, -0.69897) + std::pow(10, -0.1760913 - 0.5228787));
  EXPECT_NEAR(enumerate_language(path, 2)[0].weight, pb + pa + pe, 1e-9);
}

TEST(Denominator, SingleLabelUnigram) {
  const NGramLm lm = estimate_ngram({{"a"}, {"a", "a"}}, 1, {"a"});
  const SymbolTable sy = make_label_symbols({"a"});
  const DenominatorGraph den = build_denominator(build_ctc_topology(LabelSeq{a}), lm, sy);
  for (const auto& s : enumerate_language(den.graph, 3)) {
    if (s.input == LabelSeq{blk, a, blk}) EXPECT_NEAR(s.weight, sentence_logprob(lm, Words{"a"}), 1e-9);
  }
  EXPECT_EQ(den.num_emissions, 2);
}

TEST(Denominator, AllAlignmentsCarryTheirSentenceWeight) {
  const NGramLm lm = fixture();
  const SymbolTable sy = make_label_symbols({"a", "b"});
  const DenominatorGraph den = build_denominator(build_ctc_topology(LabelSeq{a, b}), lm, sy);
  const auto lang = enumerate_language(den.graph, 3);
  int n3 = 0;
  for (const auto& s : lang) {
    if (s.input.size() != 3) continue;
    ++n3;
    EXPECT_NEAR(s.weight, oracle::ngram_all_paths(lm, to_symbols(oracle::collapse(s.input), sy)), 1e-9);
  }
  EXPECT_EQ(n3, 27);
  for (const auto& s : lang)
    if (s.input == LabelSeq(3, blk)) EXPECT_NEAR(s.weight, oracle::ngram_all_paths(lm, {}), 1e-9);
}

// Alignments up to length 5, alphabets up to 2, random LMs up to order 3.
TEST(Denominator, RandomLmsMatchOracle) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = std::uniform_int_distribution<int>(1, 2)(rng);
    const Words names = default_label_names(k);
    const SymbolTable sy = make_label_symbols(names);
    const int order = std::uniform_int_distribution<int>(1, 3)(rng);
    const NGramLm lm = random_lm(rng, order, names);
    const DenominatorGraph den = build_denominator(build_ctc_topology(make_alphabet(k)), lm, sy);
    for (const auto& s : enumerate_language(den.graph, 5)) {
      ASSERT_NEAR(s.weight, oracle::ngram_all_paths(lm, to_symbols(oracle::collapse(s.input), sy)), 1e-9)
          << "trial " << trial;
    }
  }
}

TEST(Denominator, VocabularyMismatchListsSymbols) {
  const NGramLm lm = estimate_ngram({{"a"}}, 1, {"a", "q"});
  const SymbolTable sy = make_label_symbols({"a", "b"});
  try {
    build_denominator(build_ctc_topology(LabelSeq{a, b}), lm, sy);
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('q'), std::string::npos) << msg;
    EXPECT_NE(msg.find('b'), std::string::npos) << msg;
  }
}

TEST(Denominator, ZeroWeightIsTopology) {
  const Wfst topo = build_ctc_topology(LabelSeq{a, b});
  const DenominatorGraph den = zero_weight_denominator(topo);
  for (const auto& s : enumerate_language(den.graph, 3)) EXPECT_EQ(s.weight, 0.0);
}

}  // namespace
}  // namespace catdesk
