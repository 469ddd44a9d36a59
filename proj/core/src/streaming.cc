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

#include "catdesk/streaming.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace catdesk {

void ChunkPlan::validate() const {
  if (chunk_size < 1) throw Error("chunk_size must be >= 1");
  if (left_context < 0 || right_context < 0) throw Error("context widths must be >= 0");
  if (!(jitter_fraction >= 0.0 && jitter_fraction < 1.0)) throw Error("jitter_fraction must be in [0, 1)");
}

std::pair<int, int> ChunkPlan::jitter_range() const {
  const int lo = std::max(1, static_cast<int>(std::ceil(chunk_size * (1.0 - jitter_fraction) - 1e-9)));
  const int hi = std::max(lo, static_cast<int>(std::floor(chunk_size * (1.0 + jitter_fraction) + 1e-9)));
  return {lo, hi};
}

ChunkLayout plan_chunks(int frames, const ChunkPlan& plan, std::optional<uint64_t> jitter_draw) {
  plan.validate();
  if (frames < 1) throw Error("plan_chunks: utterance must have at least one frame");
  ChunkLayout layout;
  layout.frames = frames;
  layout.left_context = plan.left_context;
  layout.right_context = plan.right_context;
  layout.chunk_size = plan.chunk_size;
  if (jitter_draw) {
    const auto [lo, hi] = plan.jitter_range();
    layout.chunk_size = lo + static_cast<int>(*jitter_draw % static_cast<uint64_t>(hi - lo + 1));
  }
  for (int begin = 0; begin < frames; begin += layout.chunk_size) {
    Chunk c;
    c.core_begin = begin;
    c.core_end = std::min(begin + layout.chunk_size, frames);
    c.input_begin = std::max(0, begin - plan.left_context);
    c.left_pad = plan.left_context - (begin - c.input_begin);
    c.input_end = std::min(frames, c.core_end + plan.right_context);
    c.right_pad = plan.right_context - (c.input_end - c.core_end);
    layout.chunks.push_back(c);
  }
  return layout;
}

Matrix chunk_input(const Matrix& features, const Chunk& chunk) {
  if (chunk.input_end > features.rows()) throw Error("chunk extends past the features");
  Matrix in = Matrix::Zero(chunk.input_rows(), features.cols());
  const int n = chunk.input_end - chunk.input_begin;
  in.middleRows(chunk.left_pad, n) = features.middleRows(chunk.input_begin, n);
  return in;
}

ChunkedOutput run_chunked(const ModelParams& params, const Matrix& features, const ChunkLayout& layout,
                          ChunkMode mode) {
  if (features.rows() != layout.frames) {
    throw Error("chunk layout covers " + std::to_string(layout.frames) + " frames but features have " +
                std::to_string(features.rows()));
  }
  const int d_h = params.shape.hidden_dim;
  ChunkedOutput out;
  out.logits = FrameLogits::Zero(layout.frames, params.shape.num_emissions);
  out.hidden = HiddenTrace::Zero(layout.frames, 2 * d_h);
  Vector carry = Vector::Zero(d_h);
  for (const Chunk& c : layout.chunks) {
    std::optional<RecurrentState> init;
    if (mode == ChunkMode::kCopyForward) init = RecurrentState{carry, Vector()};
    AmOutput am = am_forward(params, chunk_input(features, c), init);
    out.logits.middleRows(c.core_begin, c.core_size()) = am.logits.middleRows(c.core_offset(), c.core_size());
    out.hidden.middleRows(c.core_begin, c.core_size()) = am.hidden.middleRows(c.core_offset(), c.core_size());
    carry = am.hidden.block(c.core_offset() + c.core_size() - 1, 0, 1, d_h).transpose();
    out.caches.push_back(std::move(am.cache));
  }
  return out;
}

ModelParams chunked_backward(const ModelParams& params, const ChunkLayout& layout, const ChunkedOutput& out,
                             const Matrix& grad_logits, const Matrix* grad_hidden) {
  if (out.caches.size() != layout.chunks.size()) throw Error("chunk caches do not match the layout");
  ModelParams grads = ModelParams::zeros(params.shape);
  for (size_t i = 0; i < layout.chunks.size(); ++i) {
    const Chunk& c = layout.chunks[i];
    Matrix gl = Matrix::Zero(c.input_rows(), grad_logits.cols());
    gl.middleRows(c.core_offset(), c.core_size()) = grad_logits.middleRows(c.core_begin, c.core_size());
    Matrix gh;
    if (grad_hidden) {
      gh = Matrix::Zero(c.input_rows(), grad_hidden->cols());
      gh.middleRows(c.core_offset(), c.core_size()) = grad_hidden->middleRows(c.core_begin, c.core_size());
    }
    grads.add_scaled(am_backward(params, out.caches[i], gl, grad_hidden ? &gh : nullptr), 1.0);
  }
  return grads;
}

TwinLoss twin_reg_loss(const HiddenTrace& student, const HiddenTrace& teacher, double lambda) {
  if (student.rows() != teacher.rows() || student.cols() != teacher.cols()) {
    throw Error("twin regularization: student and teacher traces differ in shape");
  }
  if (lambda < 0.0) throw Error("twin regularization weight must be >= 0");
  TwinLoss out;
  const double count = static_cast<double>(student.size());
  if (count == 0.0) {
    out.grad = Matrix::Zero(student.rows(), student.cols());
    return out;
  }
  const Matrix diff = student - teacher;
  out.loss = lambda * diff.squaredNorm() / count;
  out.grad = (2.0 * lambda / count) * diff;
  return out;
}

SequenceLoss make_ctc_loss() {
  return [](const FrameLogits& logits, std::span<const Label> labels) {
    CtcLoss ctc = ctc_loss(logits, labels);
    LossReport r;
    r.ctc_aux_loss = ctc.loss;
    r.total = ctc.loss;
    r.grad_logits = std::move(ctc.grad);
    return r;
  };
}

TrainingLoss whole_utterance_loss(const ModelParams& params, const Matrix& features,
                                  std::span<const Label> labels, const SequenceLoss& loss) {
  AmOutput am = am_forward(params, features);
  TrainingLoss out;
  out.sequence = loss(am.logits, labels);
  out.total = out.sequence.total;
  out.grads = am_backward(params, am.cache, out.sequence.grad_logits);
  return out;
}

TrainingLoss csf_training_loss(const ModelParams& student, const Matrix& features,
                               std::span<const Label> labels, const SequenceLoss& loss,
                               const ChunkLayout& layout, const TwinConfig& twin) {
  ChunkedOutput chunked = run_chunked(student, features, layout);
  TrainingLoss out;
  out.sequence = loss(chunked.logits, labels);
  out.total = out.sequence.total;
  if (twin.teacher && twin.lambda > 0.0) {
    if (!(twin.teacher->shape == student.shape)) throw Error("teacher and student shapes differ");
    const HiddenTrace teacher_trace = am_forward(*twin.teacher, features).hidden;
    TwinLoss tw = twin_reg_loss(chunked.hidden, teacher_trace, twin.lambda);
    out.twin_loss = tw.loss;
    out.total += tw.loss;
    out.grads = chunked_backward(student, layout, chunked, out.sequence.grad_logits, &tw.grad);
  } else {
    out.grads = chunked_backward(student, layout, chunked, out.sequence.grad_logits);
  }
  return out;
}

double context_latency_ms(int right_context, double frame_shift_ms, int sampling_factor) {
  return right_context * frame_shift_ms * sampling_factor;
}

StreamingRecognizer::StreamingRecognizer(const ModelParams& params, const ChunkPlan& plan, ChunkMode mode)
    : params_(params), plan_(plan), mode_(mode), carried_forward_(Vector::Zero(params.shape.hidden_dim)) {
  plan_.validate();
}

std::vector<EmittedFrame> StreamingRecognizer::push(int64_t index, std::span<const double> frame) {
  if (finished_) throw Error("stream already finished");
  if (index != static_cast<int64_t>(buffer_.size())) {
    throw Error("out-of-order frame: expected " + std::to_string(buffer_.size()) + ", got " +
                std::to_string(index));
  }
  if (static_cast<int>(frame.size()) != params_.shape.input_dim) {
    throw Error("frame width " + std::to_string(frame.size()) + " does not match d_in " +
                std::to_string(params_.shape.input_dim));
  }
  buffer_.emplace_back(Eigen::Map<const Eigen::RowVectorXd>(frame.data(), static_cast<Eigen::Index>(frame.size())));
  std::vector<EmittedFrame> out;
  const int ingested = static_cast<int>(buffer_.size());
  while (next_core_ + plan_.chunk_size + plan_.right_context <= ingested) {
    auto rows = run_chunk(next_core_ + plan_.chunk_size, ingested - 1);
    out.insert(out.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  }
  return out;
}

std::vector<EmittedFrame> StreamingRecognizer::finish() {
  std::vector<EmittedFrame> out;
  const int total = static_cast<int>(buffer_.size());
  while (next_core_ < total) {
    auto rows = run_chunk(std::min(next_core_ + plan_.chunk_size, total), total - 1);
    out.insert(out.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  }
  finished_ = true;
  return out;
}

std::vector<EmittedFrame> StreamingRecognizer::run_chunk(int core_end, int64_t ingest_index) {
  const int available = static_cast<int>(buffer_.size());
  Chunk c;
  c.core_begin = next_core_;
  c.core_end = core_end;
  c.input_begin = std::max(0, c.core_begin - plan_.left_context);
  c.left_pad = plan_.left_context - (c.core_begin - c.input_begin);
  c.input_end = std::min(available, c.core_end + plan_.right_context);
  c.right_pad = plan_.right_context - (c.input_end - c.core_end);

  Matrix in = Matrix::Zero(c.input_rows(), params_.shape.input_dim);
  for (int t = c.input_begin; t < c.input_end; ++t) in.row(c.left_pad + t - c.input_begin) = buffer_[t];

  std::optional<RecurrentState> init;
  if (mode_ == ChunkMode::kCopyForward) init = RecurrentState{carried_forward_, Vector()};
  AmOutput am = am_forward(params_, in, init);
  const int d_h = params_.shape.hidden_dim;
  carried_forward_ = am.hidden.block(c.core_offset() + c.core_size() - 1, 0, 1, d_h).transpose();

  std::vector<EmittedFrame> out;
  for (int t = c.core_begin; t < c.core_end; ++t) {
    EmittedFrame f;
    f.index = t;
    f.ingest_index = ingest_index;
    f.logits = am.logits.row(c.core_offset() + t - c.core_begin);
    out.push_back(std::move(f));
  }
  next_core_ = core_end;
  return out;
}

std::vector<EmittedFrame> streaming_infer(const ModelParams& params, const Matrix& features,
                                          const ChunkPlan& plan, ChunkMode mode) {
  StreamingRecognizer rec(params, plan, mode);
  std::vector<EmittedFrame> out;
  for (Eigen::Index t = 0; t < features.rows(); ++t) {
    const Eigen::RowVectorXd row = features.row(t);
    auto rows = rec.push(t, std::span<const double>(row.data(), static_cast<size_t>(row.size())));
    out.insert(out.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  }
  auto rows = rec.finish();
  out.insert(out.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  return out;
}

}  // namespace catdesk
