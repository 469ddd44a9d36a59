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

#include "catdesk/trainer.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

namespace catdesk {

TrainMode parse_train_mode(const std::string& s) {
  if (s == "whole") return TrainMode::kWhole;
  if (s == "csf") return TrainMode::kCsf;
  if (s == "sf") return TrainMode::kSf;
  throw Error("unknown training mode '" + s + "' (expected whole, csf or sf)");
}

LabelDecoder greedy_decoder() { return [](const FrameLogits& logits) { return greedy_decode(logits); }; }

LabelDecoder graph_decoder(const Wfst& graph, const DecodeOptions& options) {
  return [&graph, options](const FrameLogits& logits) {
    const Hypothesis h = beam_decode(graph, logits, options);
    return LabelSeq(h.tokens.begin(), h.tokens.end());
  };
}

ChunkPlan sf_plan(const ChunkPlan& plan) {
  ChunkPlan p = plan;
  p.left_context = 0;
  p.right_context = 0;
  return p;
}

FrameLogits infer_logits(const ModelParams& params, const Matrix& features, InferenceMode mode,
                         const ChunkPlan& plan) {
  switch (mode) {
    case InferenceMode::kWhole:
      return am_forward(params, features).logits;
    case InferenceMode::kChunkedReset: {
      ChunkPlan p = plan;
      p.jitter_fraction = 0.0;
      return run_chunked(params, features, plan_chunks(static_cast<int>(features.rows()), p)).logits;
    }
    case InferenceMode::kChunkedCopy: {
      ChunkPlan p = sf_plan(plan);
      p.jitter_fraction = 0.0;
      return run_chunked(params, features, plan_chunks(static_cast<int>(features.rows()), p),
                         ChunkMode::kCopyForward)
          .logits;
    }
  }
  throw Error("unknown inference mode");
}

EditStats evaluate(const ModelParams& params, const std::vector<Utterance>& utts, const LabelDecoder& decoder,
                   InferenceMode mode, const ChunkPlan& plan) {
  EditStats total;
  for (const auto& u : utts) {
    const LabelSeq hyp = decoder(infer_logits(params, u.features, mode, plan));
    total += edit_distance(u.transcript, hyp);
  }
  return total;
}

namespace {

struct UttResult {
  bool ok = false;
  double loss = 0.0;
  ModelParams grads;
};

}  // namespace

TrainResult train_model(const ModelParams& init, const std::vector<Utterance>& train,
                        const std::vector<Utterance>& dev, const SequenceLoss& loss,
                        const LabelDecoder& decoder, const TrainOptions& options,
                        const ModelParams* teacher) {
  if (train.empty()) throw Error("training set is empty");
  if (options.epochs < 1 || options.batch_size < 1 || options.workers < 1)
    throw Error("epochs, batch_size and workers must be >= 1");
  if (options.mode != TrainMode::kWhole && options.twin_lambda > 0.0 && !teacher)
    throw Error("chunked training with twin regularization needs a teacher model");

  const ChunkPlan plan = options.mode == TrainMode::kSf ? sf_plan(options.plan) : options.plan;
  plan.validate();
  TrainResult result;
  ModelParams params = init;
  OptimState opt = OptimState::init(params, options.optim);
  std::mt19937_64 rng(options.seed);
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  double best_per = std::numeric_limits<double>::infinity();
  const TwinConfig twin{options.twin_lambda, teacher};

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int counted = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(options.batch_size)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(options.batch_size));
      const uint64_t jitter_draw = rng();
      std::vector<UttResult> results(end - start);
      auto work = [&](size_t i) {
        const Utterance& u = train[order[start + i]];
        try {
          TrainingLoss tl;
          if (options.mode == TrainMode::kWhole) {
            tl = whole_utterance_loss(params, u.features, u.transcript, loss);
          } else {
            std::optional<uint64_t> draw;
            if (plan.jitter_fraction > 0.0) draw = jitter_draw;
            const ChunkLayout layout = plan_chunks(static_cast<int>(u.features.rows()), plan, draw);
            tl = csf_training_loss(params, u.features, u.transcript, loss, layout, twin);
          }
          results[i] = UttResult{true, tl.total, std::move(tl.grads)};
        } catch (const InfeasibleUtterance&) {
          results[i].ok = false;
        }
      };
      const size_t n = end - start;
      const size_t workers = std::min(n, static_cast<size_t>(options.workers));
      if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) work(i);
      } else {
        std::vector<std::thread> pool;
        for (size_t w = 0; w < workers; ++w) {
          pool.emplace_back([&, w] {
            for (size_t i = w; i < n; i += workers) work(i);
          });
        }
        for (auto& t : pool) t.join();
      }

      ModelParams grads = ModelParams::zeros(params.shape);
      int used = 0;
      for (size_t i = 0; i < n; ++i) {
        if (!results[i].ok) {
          ++result.skipped;
          if (options.log) *options.log << "# warning: skipped infeasible utterance " << train[order[start + i]].id << '\n';
          continue;
        }
        grads.add_scaled(results[i].grads, 1.0);
        loss_sum += results[i].loss;
        ++used;
      }
      if (used == 0) continue;
      counted += used;
      grads.add_scaled(grads, 1.0 / used - 1.0);
      optimizer_step(params, grads, opt);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = counted ? loss_sum / counted : 0.0;
    rec.dev_per = dev.empty() ? 0.0 : 100.0 * evaluate(params, dev, decoder, options.eval_mode, options.plan).error_rate();
    result.history.push_back(rec);
    if (options.log) *options.log << rec.epoch << ' ' << rec.loss << ' ' << rec.dev_per << std::endl;
    if (rec.dev_per <= best_per) {
      best_per = rec.dev_per;
      result.best = params;
      result.best_epoch = epoch;
    }
  }
  result.last = params;
  return result;
}

}  // namespace catdesk
