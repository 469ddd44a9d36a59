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

#ifndef CATDESK_TRAINER_H_
#define CATDESK_TRAINER_H_

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "catdesk/am.h"
#include "catdesk/data.h"
#include "catdesk/decode.h"
#include "catdesk/streaming.h"

namespace catdesk {

enum class TrainMode {
  kWhole,  // whole-utterance unrolling
  kCsf,    // context-sensitive chunks, reset states, twin regularization
  kSf,     // soft-forgetting baseline: no contexts, reset per chunk, twin regularization
};

// How frame logits are produced at evaluation time.
enum class InferenceMode {
  kWhole,
  kChunkedReset,   // CSF streaming inference
  kChunkedCopy,    // SF streaming inference (forward state copied over)
};

TrainMode parse_train_mode(const std::string& s);

struct TrainOptions {
  TrainMode mode = TrainMode::kWhole;
  int epochs = 30;
  int batch_size = 1;
  int workers = 1;
  uint64_t seed = 1;
  OptimConfig optim;
  ChunkPlan plan;          // kCsf / kSf; contexts are forced to 0 for kSf
  double twin_lambda = kDefaultTwinWeight;
  InferenceMode eval_mode = InferenceMode::kWhole;
  std::ostream* log = nullptr;  // one `epoch loss dev-PER` line per epoch
};

using LabelDecoder = std::function<LabelSeq(const FrameLogits&)>;

LabelDecoder greedy_decoder();
// Viterbi over `graph` (kept by reference); output symbols are label ids.
LabelDecoder graph_decoder(const Wfst& graph, const DecodeOptions& options = {});

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;     // mean total loss over trained utterances
  double dev_per = 0.0;  // percent
};

struct TrainResult {
  ModelParams best;
  ModelParams last;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  int skipped = 0;  // infeasible utterances skipped over all epochs
};

// Minibatch Adam training. Per-utterance losses within a batch may be
// computed on `workers` threads; gradients are reduced in utterance order so
// results do not depend on the worker count. The returned `best` has the
// lowest dev PER (later epochs win ties).
TrainResult train_model(const ModelParams& init, const std::vector<Utterance>& train,
                        const std::vector<Utterance>& dev, const SequenceLoss& loss,
                        const LabelDecoder& decoder, const TrainOptions& options,
                        const ModelParams* teacher = nullptr);

FrameLogits infer_logits(const ModelParams& params, const Matrix& features, InferenceMode mode,
                         const ChunkPlan& plan);

// PER over utterances, scoring decoder(logits) against transcripts.
EditStats evaluate(const ModelParams& params, const std::vector<Utterance>& utts, const LabelDecoder& decoder,
                   InferenceMode mode, const ChunkPlan& plan);

// Chunk plan used for SF: same core size and jitter, no contexts.
ChunkPlan sf_plan(const ChunkPlan& plan);

}  // namespace catdesk

#endif  // CATDESK_TRAINER_H_
