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

#ifndef CATDESK_STREAMING_H_
#define CATDESK_STREAMING_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "catdesk/am.h"
#include "catdesk/loss.h"

namespace catdesk {

inline constexpr int kDefaultChunkSize = 40;
inline constexpr int kDefaultLeftContext = 10;
inline constexpr int kDefaultRightContext = 10;
inline constexpr double kDefaultTwinWeight = 0.005;
inline constexpr double kDefaultJitterFraction = 0.25;
inline constexpr double kDefaultFrameShiftMs = 10.0;
inline constexpr int kDefaultSamplingFactor = 3;

struct ChunkPlan {
  int chunk_size = kDefaultChunkSize;
  int left_context = kDefaultLeftContext;
  int right_context = kDefaultRightContext;
  double jitter_fraction = 0.0;

  void validate() const;
  // Inclusive range of chunk sizes jitter can realize.
  std::pair<int, int> jitter_range() const;
};

// One context-sensitive chunk. The network input is
//   [left_pad zeros][frames input_begin .. input_end)[right_pad zeros]
// where the core [core_begin, core_end) sits left_context rows in.
struct Chunk {
  int core_begin = 0;
  int core_end = 0;
  int input_begin = 0;
  int input_end = 0;
  int left_pad = 0;
  int right_pad = 0;

  int core_size() const { return core_end - core_begin; }
  int core_offset() const { return left_pad + (core_begin - input_begin); }
  int input_rows() const { return left_pad + (input_end - input_begin) + right_pad; }
};

struct ChunkLayout {
  int frames = 0;
  int chunk_size = 0;  // realized size after jitter
  int left_context = 0;
  int right_context = 0;
  std::vector<Chunk> chunks;
};

// Splits [0, frames) into consecutive cores of one realized size and attaches
// contexts, zero-padded past the utterance edges. `jitter_draw`, when given,
// picks the realized size from plan.jitter_range().
ChunkLayout plan_chunks(int frames, const ChunkPlan& plan, std::optional<uint64_t> jitter_draw = std::nullopt);

// Builds one chunk's network input from the utterance features.
Matrix chunk_input(const Matrix& features, const Chunk& chunk);

enum class ChunkMode {
  // Both directions start from zero in every chunk (contextualized soft forgetting).
  kReset,
  // The forward state after each core is carried into the next chunk; the
  // backward direction still resets (soft-forgetting inference).
  kCopyForward,
};

struct ChunkedOutput {
  FrameLogits logits;  // T rows, context outputs dropped
  HiddenTrace hidden;  // T x 2 d_h, core frames only
  std::vector<AmCache> caches;
};

ChunkedOutput run_chunked(const ModelParams& params, const Matrix& features, const ChunkLayout& layout,
                          ChunkMode mode = ChunkMode::kReset);

// Backward through run_chunked (kReset only). Gradients for context rows
// are zero since their outputs were discarded.
ModelParams chunked_backward(const ModelParams& params, const ChunkLayout& layout, const ChunkedOutput& out,
                             const Matrix& grad_logits, const Matrix* grad_hidden = nullptr);

struct TwinLoss {
  double loss = 0.0;
  Matrix grad;  // d loss / d student
};

// lambda * mean squared difference over frames, directions and units.
TwinLoss twin_reg_loss(const HiddenTrace& student, const HiddenTrace& teacher, double lambda);

struct TwinConfig {
  double lambda = kDefaultTwinWeight;
  const ModelParams* teacher = nullptr;  // frozen; null disables the term
};

// Sequence loss on frame logits, e.g. a CtcCrfObjective or plain CTC.
using SequenceLoss = std::function<LossReport(const FrameLogits&, std::span<const Label>)>;

// Plain CTC packaged as a SequenceLoss (crf_loss stays 0).
SequenceLoss make_ctc_loss();

struct TrainingLoss {
  LossReport sequence;
  double twin_loss = 0.0;
  double total = 0.0;
  ModelParams grads;
};

// Whole-utterance forward, sequence loss, backward.
TrainingLoss whole_utterance_loss(const ModelParams& params, const Matrix& features,
                                  std::span<const Label> labels, const SequenceLoss& loss);

// Chunked forward over `layout`, sequence loss on the spliced logits plus
// twin regularization against the teacher's whole-utterance trace. The
// teacher gets no gradient.
TrainingLoss csf_training_loss(const ModelParams& student, const Matrix& features,
                               std::span<const Label> labels, const SequenceLoss& loss,
                               const ChunkLayout& layout, const TwinConfig& twin);

// Latency contributed by the right context: N_r * shift * sampling factor.
double context_latency_ms(int right_context, double frame_shift_ms, int sampling_factor);

struct EmittedFrame {
  int64_t index = 0;
  int64_t ingest_index = 0;  // last frame ingested when this row was emitted
  int64_t lag() const { return ingest_index - index; }
  Eigen::RowVectorXd logits;
};

// Incremental chunked inference. Frames must arrive with consecutive
// indices starting at 0; rows come out chunk by chunk as soon as the chunk's
// right context has been ingested.
class StreamingRecognizer {
 public:
  StreamingRecognizer(const ModelParams& params, const ChunkPlan& plan, ChunkMode mode = ChunkMode::kReset);

  std::vector<EmittedFrame> push(int64_t index, std::span<const double> frame);
  // Flushes the tail using zero padding for missing right context.
  std::vector<EmittedFrame> finish();

  int64_t frames_ingested() const { return static_cast<int64_t>(buffer_.size()); }

 private:
  std::vector<EmittedFrame> run_chunk(int core_end, int64_t ingest_index);

  const ModelParams& params_;
  ChunkPlan plan_;
  ChunkMode mode_;
  std::vector<Eigen::RowVectorXd> buffer_;
  int next_core_ = 0;
  Vector carried_forward_;
  bool finished_ = false;
};

// Runs a whole utterance through StreamingRecognizer.
std::vector<EmittedFrame> streaming_infer(const ModelParams& params, const Matrix& features,
                                          const ChunkPlan& plan, ChunkMode mode = ChunkMode::kReset);

}  // namespace catdesk

#endif  // CATDESK_STREAMING_H_
