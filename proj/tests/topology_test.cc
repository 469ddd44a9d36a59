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

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "catdesk/loss.h"
#include "catdesk/topology.h"
#include "oracles.h"

namespace catdesk {
namespace {

constexpr Label blk = kBlank, a = 2, b = 3;

std::set<LabelSeq> language_at(const Wfst& f, int t) {
  std::set<LabelSeq> out;
  for (const auto& s : enumerate_language(f, t))
    if (static_cast<int>(s.input.size()) == t) out.insert(s.input);
  return out;
}

TEST(Collapse, MergesRepeatsThenDropsBlanks) {
  EXPECT_EQ(ctc_collapse(Alignment{blk, a, a, blk, b}), (LabelSeq{a, b}));
  EXPECT_EQ(ctc_collapse(Alignment{blk, blk, blk}), LabelSeq{});
  EXPECT_EQ(ctc_collapse(Alignment{a, blk, a}), (LabelSeq{a, a}));
}

TEST(Collapse, IdentityOnBlankFreeRepeatFreeSequences) {
  for (const auto& s : oracle::all_strings({a, b}, 4)) {
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) continue;
    EXPECT_EQ(ctc_collapse(s), s);
    EXPECT_EQ(ctc_collapse(ctc_collapse(s)), s);
  }
}

TEST(EnumerateAlignments, FiveForAbInThreeFrames) {
  const LabelSeq ab{a, b}, alphabet{a, b};
  const auto got = enumerate_alignments(ab, 3, alphabet);
  // 27 strings over {blk, a, b}, filtered by hand-written collapse.
  std::vector<Alignment> expected;
  for (const auto& s : oracle::all_strings({blk, a, b}, 3))
    if (oracle::collapse(s) == ab) expected.push_back(s);
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(expected.size(), 5u);
  EXPECT_EQ(got, expected);
}

TEST(EnumerateAlignments, SmallCases) {
  const LabelSeq alphabet{a};
  EXPECT_EQ(enumerate_alignments(LabelSeq{a}, 1, alphabet), std::vector<Alignment>{Alignment{a}});
  EXPECT_TRUE(enumerate_alignments(LabelSeq{a, a}, 2, alphabet).empty());
}

TEST(EnumerateAlignments, Guards) {
  const LabelSeq alphabet{a, b};
  EXPECT_THROW(enumerate_alignments(LabelSeq{a}, 11, alphabet), OverflowError);
  const LabelSeq big = make_alphabet(6);  // 7^9 > 1e7
  EXPECT_THROW(enumerate_alignments(LabelSeq{2}, 9, big), OverflowError);
}

TEST(EnumerateAlignments, EveryResultCollapsesBack) {
  std::mt19937_64 rng(3);
  const LabelSeq alphabet{a, b};
  for (int trial = 0; trial < 100; ++trial) {
    LabelSeq l;
    const int n = std::uniform_int_distribution<int>(0, 3)(rng);
    for (int i = 0; i < n; ++i) l.push_back(alphabet[rng() % 2]);
    const int t = std::uniform_int_distribution<int>(1, 6)(rng);
    for (const auto& pi : enumerate_alignments(l, t, alphabet)) ASSERT_EQ(ctc_collapse(pi), l);
  }
}

TEST(Topology, MinimalEmissionSet) {
  for (int k = 1; k <= 5; ++k) {
    const Wfst topo = build_ctc_topology(make_alphabet(k));
    EXPECT_EQ(static_cast<int>(topo.input_alphabet().size()), num_emissions(k));
    EXPECT_EQ(topo.num_states(), k + 2);
  }
}

TEST(Topology, SingleLabelAcceptsBlankLabelBlank) {
  const LabelSeq alphabet{a};
  const Wfst topo = build_ctc_topology(alphabet);
  bool found = false;
  for (const auto& p : enumerate_relation(topo, 3)) {
    if (p.input == LabelSeq{blk, a, blk}) {
      found = true;
      EXPECT_EQ(p.output, LabelSeq{a});
      EXPECT_EQ(p.weight, 0.0);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Topology, CountsMatchOracleAndRejectsRepeatWithoutBlank) {
  const LabelSeq alphabet{a, b};
  const Wfst topo = build_ctc_topology(alphabet);
  int ab_count = 0;
  for (const auto& p : enumerate_relation(topo, 3)) {
    if (p.input.size() == 3 && p.output == LabelSeq{a, b}) ++ab_count;
    if (p.input.size() == 2) EXPECT_NE(p.output, (LabelSeq{a, a}));
  }
  EXPECT_EQ(ab_count, 5);
  // Every input string has exactly one path and its output is its collapse.
  for (int t = 1; t <= 4; ++t) {
    int n = 0;
    for (const auto& p : enumerate_relation(topo, t)) {
      if (static_cast<int>(p.input.size()) != t) continue;
      ++n;
      EXPECT_EQ(p.output, oracle::collapse(p.input));
      EXPECT_EQ(p.weight, 0.0);
    }
    EXPECT_EQ(n, static_cast<int>(std::pow(3, t)));
  }
}

TEST(Numerator, AbAtThreeFramesIsTheFiveAlignments) {
  const LabelSeq ab{a, b}, alphabet{a, b};
  const Wfst num = numerator_graph(ab, build_ctc_topology(alphabet));
  const auto lang = enumerate_language(num, 3);
  std::set<LabelSeq> at3;
  for (const auto& s : lang) {
    if (s.input.size() != 3) continue;
    at3.insert(s.input);
    EXPECT_EQ(s.weight, 0.0);
  }
  const auto oracle = enumerate_alignments(ab, 3, alphabet);
  EXPECT_EQ(at3, std::set<LabelSeq>(oracle.begin(), oracle.end()));
}

TEST(Numerator, EmptyLabelsAcceptAllBlank) {
  const Wfst num = numerator_graph(LabelSeq{}, build_ctc_topology(LabelSeq{a, b}));
  for (int t = 1; t <= 5; ++t) EXPECT_EQ(language_at(num, t), std::set<LabelSeq>{LabelSeq(t, blk)});
}

TEST(Numerator, TooLongTranscriptHasNoPath) {
  const LabelSeq aba{a, b, a};
  const Wfst num = numerator_graph(aba, build_ctc_topology(LabelSeq{a, b}));
  const ForwardBackward fb = graph_forward_backward(num, Matrix::Zero(2, 3));
  EXPECT_FALSE(fb.feasible);
  EXPECT_EQ(fb.log_z, kLogZero);
  EXPECT_EQ(fb.occupancy.size(), 0);
  EXPECT_EQ(min_frames(aba), 3);
  EXPECT_EQ(min_frames(LabelSeq{a, a, b}), 4);
}

TEST(Numerator, UnknownLabelIsAnError) {
  EXPECT_THROW(numerator_graph(LabelSeq{9}, build_ctc_topology(LabelSeq{a, b})), Error);
}

TEST(Numerator, RandomLanguagesMatchEnumeratedAlignments) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = std::uniform_int_distribution<int>(1, 2)(rng);
    const LabelSeq alphabet = make_alphabet(k);
    const Wfst topo = build_ctc_topology(alphabet);
    LabelSeq l;
    const int n = std::uniform_int_distribution<int>(0, 3)(rng);
    for (int i = 0; i < n; ++i) l.push_back(alphabet[rng() % alphabet.size()]);
    const int t = std::uniform_int_distribution<int>(1, 6)(rng);
    const auto oracle = enumerate_alignments(l, t, alphabet);
    ASSERT_EQ(language_at(numerator_graph(l, topo), t), std::set<LabelSeq>(oracle.begin(), oracle.end()))
        << "trial " << trial;
  }
}

}  // namespace
}  // namespace catdesk
