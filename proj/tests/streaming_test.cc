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

#include <random>
#include <set>

#include "catdesk/lm.h"
#include "catdesk/streaming.h"
#include "catdesk/topology.h"
#include "oracles.h"

namespace catdesk {
namespace {

const AmShape kTiny{2, 4, 3};

void expect_partition(const ChunkLayout& layout, int t) {
  int next = 0;
  for (const Chunk& c : layout.chunks) {
    ASSERT_EQ(c.core_begin, next);
    ASSERT_GT(c.core_end, c.core_begin);
    ASSERT_EQ(c.input_rows(), layout.left_context + c.core_size() + layout.right_context);
    next = c.core_end;
  }
  ASSERT_EQ(next, t);
}

TEST(PlanChunks, HundredFramesDefaultPlan) {
  const ChunkLayout l = plan_chunks(100, ChunkPlan{});
  ASSERT_EQ(l.chunks.size(), 3u);
  EXPECT_EQ(l.chunks[0].core_begin, 0);
  EXPECT_EQ(l.chunks[0].core_end, 40);
  EXPECT_EQ(l.chunks[1].core_end, 80);
  EXPECT_EQ(l.chunks[2].core_end, 100);
  EXPECT_EQ(l.chunks[0].left_pad, 10);
  EXPECT_EQ(l.chunks[0].right_pad, 0);
  EXPECT_EQ(l.chunks[1].left_pad, 0);
  EXPECT_EQ(l.chunks[1].input_begin, 30);
  EXPECT_EQ(l.chunks[1].input_end, 90);
  EXPECT_EQ(l.chunks[2].right_pad, 10);
  EXPECT_EQ(l.chunks[2].input_end, 100);
}

TEST(PlanChunks, ShortUtteranceIsOneChunk) {
  const ChunkLayout l = plan_chunks(30, ChunkPlan{});
  ASSERT_EQ(l.chunks.size(), 1u);
  EXPECT_EQ(l.chunks[0].left_pad, 10);
  EXPECT_EQ(l.chunks[0].right_pad, 10);
  EXPECT_EQ(l.chunks[0].core_size(), 30);
}

TEST(PlanChunks, ContextsArePaddedWithZeros) {
  std::mt19937_64 rng(1);
  const Matrix x = oracle::random_matrix(rng, 5, 2);
  const ChunkLayout l = plan_chunks(5, ChunkPlan{3, 2, 2});
  const Matrix first = chunk_input(x, l.chunks[0]);
  EXPECT_EQ(first.rows(), 7);
  EXPECT_EQ(first.topRows(2), Matrix::Zero(2, 2));
  EXPECT_EQ(first.bottomRows(5), x);
  const Matrix last = chunk_input(x, l.chunks[1]);
  EXPECT_EQ(last.topRows(4), x.bottomRows(4));
  EXPECT_EQ(last.bottomRows(2), Matrix::Zero(2, 2));
}

TEST(PlanChunks, JitterStaysInRange) {
  const ChunkPlan plan{40, 10, 10, 0.25};
  EXPECT_EQ(plan.jitter_range(), std::make_pair(30, 50));
  std::mt19937_64 rng(2);
  std::set<int> seen;
  for (int i = 0; i < 200; ++i) {
    const ChunkLayout l = plan_chunks(400, plan, rng());
    EXPECT_GE(l.chunk_size, 30);
    EXPECT_LE(l.chunk_size, 50);
    for (size_t k = 0; k + 1 < l.chunks.size(); ++k) EXPECT_EQ(l.chunks[k].core_size(), l.chunk_size);
    seen.insert(l.chunk_size);
  }
  EXPECT_GT(seen.size(), 10u);
}

TEST(PlanChunks, InvalidPlansThrow) {
  EXPECT_THROW(plan_chunks(10, ChunkPlan{0, 1, 1}), Error);
  EXPECT_THROW(plan_chunks(10, ChunkPlan{4, -1, 1}), Error);
  EXPECT_THROW(plan_chunks(0, ChunkPlan{}), Error);
  EXPECT_THROW(plan_chunks(10, ChunkPlan{4, 1, 1, 1.0}), Error);
}

TEST(PlanChunks, CoresPartitionUtterance) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const int t = std::uniform_int_distribution<int>(1, 300)(rng);
    ChunkPlan plan;
    plan.chunk_size = std::uniform_int_distribution<int>(1, 60)(rng);
    plan.left_context = std::uniform_int_distribution<int>(0, 15)(rng);
    plan.right_context = std::uniform_int_distribution<int>(0, 15)(rng);
    plan.jitter_fraction = std::uniform_real_distribution<double>(0.0, 0.9)(rng);
    const ChunkLayout l = plan_chunks(t, plan, rng());
    expect_partition(l, t);
  }
}

TEST(RunChunked, SplicedLengthIsT) {
  std::mt19937_64 rng(4);
  const ModelParams p = ModelParams::random(kTiny, 4);
  for (int t : {1, 5, 17, 40}) {
    const Matrix x = oracle::random_matrix(rng, t, 2);
    const ChunkedOutput out = run_chunked(p, x, plan_chunks(t, ChunkPlan{6, 2, 3}));
    EXPECT_EQ(out.logits.rows(), t);
    EXPECT_EQ(out.hidden.rows(), t);
  }
}

TEST(RunChunked, FrameLocalModelMatchesWholeUtterance) {
  ModelParams p = ModelParams::random(kTiny, 5);
  for (GruParams* g : {&p.forward, &p.backward}) {
    g->u_z.setZero();
    g->u_r.setZero();
    g->u_n.setZero();
    g->w_z.setZero();
    g->b_z.setConstant(-1e4);  // update gate closed: h' = n
  }
  std::mt19937_64 rng(5);
  const Matrix x = oracle::random_matrix(rng, 23, 2);
  const ChunkedOutput out = run_chunked(p, x, plan_chunks(23, ChunkPlan{5, 2, 2}));
  EXPECT_EQ(out.logits, am_forward(p, x).logits);
}

TEST(RunChunked, SingleFullChunkMatchesWholeUtterance) {
  const ModelParams p = ModelParams::random(kTiny, 6);
  std::mt19937_64 rng(6);
  const Matrix x = oracle::random_matrix(rng, 11, 2);
  const ChunkedOutput out = run_chunked(p, x, plan_chunks(11, ChunkPlan{20, 0, 0}));
  const AmOutput whole = am_forward(p, x);
  EXPECT_EQ(out.logits, whole.logits);
  EXPECT_EQ(out.hidden, whole.hidden);
}

TEST(RunChunked, LayoutMismatchThrows) {
  const ModelParams p = ModelParams::random(kTiny, 6);
  EXPECT_THROW(run_chunked(p, Matrix::Zero(10, 2), plan_chunks(11, ChunkPlan{4, 1, 1})), Error);
}

TEST(TwinLoss, Basics) {
  std::mt19937_64 rng(7);
  const Matrix s = oracle::random_matrix(rng, 6, 8);
  const TwinLoss same = twin_reg_loss(s, s, 0.005);
  EXPECT_EQ(same.loss, 0.0);
  EXPECT_EQ(same.grad.cwiseAbs().maxCoeff(), 0.0);
  const Matrix t = oracle::random_matrix(rng, 6, 8);
  EXPECT_EQ(twin_reg_loss(s, t, 0.0).loss, 0.0);
  EXPECT_GT(twin_reg_loss(s, t, 0.005).loss, 0.0);
  EXPECT_NEAR(twin_reg_loss(s, t, 2.0).loss, 2.0 * (s - t).squaredNorm() / 48, 1e-12);
  EXPECT_THROW(twin_reg_loss(s, Matrix::Zero(5, 8), 0.005), Error);
}

TEST(TwinLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  const Matrix s = oracle::random_matrix(rng, 5, 6);
  const Matrix t = oracle::random_matrix(rng, 5, 6);
  const Matrix num = oracle::numeric_gradient([&](const Matrix& m) { return twin_reg_loss(m, t, 0.7).loss; }, s);
  EXPECT_LE(oracle::max_relative_error(twin_reg_loss(s, t, 0.7).grad, num, 1e-8), 1e-6);
}

struct CrfSetup {
  NGramLm lm = estimate_ngram({{"a", "b"}, {"b", "a", "b"}, {"a"}}, 2, {"a", "b"});
  SymbolTable sy = make_label_symbols({"a", "b"});
  Wfst topo = build_ctc_topology(make_alphabet(2));
  DenominatorGraph den = build_denominator(topo, lm, sy);
  CtcCrfObjective obj{topo, den, &lm, sy, 0.01};
};

TEST(CsfLoss, ReducesToPlainLoss) {
  CrfSetup s;
  std::mt19937_64 rng(9);
  const Matrix x = oracle::random_matrix(rng, 9, 2);
  const ModelParams p = ModelParams::random(kTiny, 9);
  const LabelSeq l{2, 3, 2};
  const ModelParams teacher = ModelParams::random(kTiny, 10);
  const TrainingLoss csf = csf_training_loss(p, x, l, s.obj, plan_chunks(9, ChunkPlan{9, 0, 0}), {0.0, &teacher});
  const TrainingLoss whole = whole_utterance_loss(p, x, l, s.obj);
  EXPECT_EQ(csf.total, whole.total);
  EXPECT_NEAR(csf.total, s.obj(am_forward(p, x).logits, l).total, 0.0);
  EXPECT_LE(oracle::max_relative_error(csf.grads, whole.grads), 1e-12);
}

TEST(CsfLoss, GradientMatchesFiniteDifferences) {
  CrfSetup s;
  std::mt19937_64 rng(10);
  const Matrix x = oracle::random_matrix(rng, 12, 2);
  const ModelParams p = ModelParams::random(kTiny, 11);
  const ModelParams teacher = ModelParams::random(kTiny, 12);
  const LabelSeq l{2, 3, 2};
  const ChunkLayout layout = plan_chunks(12, ChunkPlan{4, 2, 2});
  for (double lambda : {0.005, 0.5}) {
    const TwinConfig twin{lambda, &teacher};
    const ModelParams analytic = csf_training_loss(p, x, l, s.obj, layout, twin).grads;
    const ModelParams numeric = oracle::numeric_param_gradient(
        [&](const ModelParams& q) { return csf_training_loss(q, x, l, s.obj, layout, twin).total; }, p);
    EXPECT_LE(oracle::max_relative_error(analytic, numeric), 1e-4) << "lambda " << lambda;
  }
}

TEST(CsfLoss, TeacherIsNotUpdated) {
  CrfSetup s;
  std::mt19937_64 rng(11);
  const Matrix x = oracle::random_matrix(rng, 12, 2);
  ModelParams student = ModelParams::random(kTiny, 13);
  const ModelParams teacher = ModelParams::random(kTiny, 14);
  const ModelParams teacher_before = teacher;
  OptimState opt = OptimState::init(student, {});
  const TrainingLoss tl =
      csf_training_loss(student, x, LabelSeq{2, 3}, s.obj, plan_chunks(12, ChunkPlan{4, 2, 2}), {0.5, &teacher});
  EXPECT_GT(tl.twin_loss, 0.0);
  optimizer_step(student, tl.grads, opt);
  auto u = teacher.tensors();
  auto v = teacher_before.tensors();
  for (size_t k = 0; k < u.size(); ++k) EXPECT_EQ(*u[k], *v[k]);
  EXPECT_EQ(teacher.version, teacher_before.version);
}

TEST(Latency, DefaultsGive300ms) {
  EXPECT_DOUBLE_EQ(context_latency_ms(kDefaultRightContext, kDefaultFrameShiftMs, kDefaultSamplingFactor), 300.0);
  EXPECT_DOUBLE_EQ(context_latency_ms(0, 10.0, 3), 0.0);
}

void check_stream(const ModelParams& p, const Matrix& x, const ChunkPlan& plan, ChunkMode mode) {
  const int t = static_cast<int>(x.rows());
  const ChunkLayout layout = plan_chunks(t, plan);
  const ChunkedOutput batch = run_chunked(p, x, layout, mode);
  const std::vector<EmittedFrame> rows = streaming_infer(p, x, plan, mode);
  ASSERT_EQ(static_cast<int>(rows.size()), t);
  for (const Chunk& c : layout.chunks) {
    for (int i = c.core_begin; i < c.core_end; ++i) {
      const EmittedFrame& f = rows[static_cast<size_t>(i)];
      ASSERT_EQ(f.index, i);
      ASSERT_TRUE(f.logits == batch.logits.row(i)) << "frame " << i;
      ASSERT_LE(f.ingest_index, std::min(c.core_end + plan.right_context, t) - 1);
      ASSERT_GE(f.lag(), 0);
      ASSERT_LE(f.lag(), plan.chunk_size + plan.right_context);
    }
  }
}

TEST(Streaming, MatchesBatchBitwiseAndRespectsLag) {
  std::mt19937_64 rng(12);
  const ModelParams p = ModelParams::random({2, 6, 4}, 15);
  for (int trial = 0; trial < 100; ++trial) {
    const int t = std::uniform_int_distribution<int>(1, 90)(rng);
    ChunkPlan plan;
    plan.chunk_size = std::uniform_int_distribution<int>(1, 40)(rng);
    plan.left_context = std::uniform_int_distribution<int>(0, 10)(rng);
    plan.right_context = std::uniform_int_distribution<int>(0, 10)(rng);
    check_stream(p, oracle::random_matrix(rng, t, 2), plan, ChunkMode::kReset);
    plan.left_context = plan.right_context = 0;
    check_stream(p, oracle::random_matrix(rng, t, 2), plan, ChunkMode::kCopyForward);
  }
}

TEST(Streaming, NoRightContextLagIsChunkDistance) {
  const ModelParams p = ModelParams::random(kTiny, 16);
  std::mt19937_64 rng(13);
  const Matrix x = oracle::random_matrix(rng, 20, 2);
  for (const EmittedFrame& f : streaming_infer(p, x, ChunkPlan{8, 3, 0})) {
    const int64_t chunk_end = std::min<int64_t>((f.index / 8 + 1) * 8, 20);
    EXPECT_EQ(f.lag(), chunk_end - 1 - f.index);
  }
}

TEST(Streaming, RejectsOutOfOrderFrames) {
  const ModelParams p = ModelParams::random(kTiny, 17);
  StreamingRecognizer rec(p, ChunkPlan{4, 1, 1});
  const std::vector<double> frame{0.1, 0.2};
  rec.push(0, frame);
  EXPECT_THROW(rec.push(2, frame), Error);
  EXPECT_THROW(rec.push(0, frame), Error);
  EXPECT_THROW(rec.push(1, std::vector<double>{1.0}), Error);
  rec.push(1, frame);
  rec.finish();
  EXPECT_THROW(rec.push(2, frame), Error);
}

}  // namespace
}  // namespace catdesk
