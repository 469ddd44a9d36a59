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

#ifndef CATDESK_AM_H_
#define CATDESK_AM_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "catdesk/types.h"

namespace catdesk {

struct AmShape {
  int input_dim = 0;
  int hidden_dim = 0;
  int num_emissions = 0;
  friend bool operator==(const AmShape&, const AmShape&) = default;
};

// One direction of the gated recurrent cell (GRU):
//   z = sigmoid(p W_z + h U_z + b_z)
//   r = sigmoid(p W_r + h U_r + b_r)
//   n = tanh(p W_n + b_n + r * (h U_n))
//   h' = (1 - z) * n + z * h
struct GruParams {
  Matrix w_z, w_r, w_n;  // d_h x d_h, from the projected input
  Matrix u_z, u_r, u_n;  // d_h x d_h, recurrent
  Matrix b_z, b_r, b_n;  // 1 x d_h
};

// Single-layer bidirectional GRU over a linear input projection, followed by
// a linear output layer. Row-vector convention throughout.
struct ModelParams {
  AmShape shape;
  Matrix input_weight;   // d_in x d_h
  Matrix input_bias;     // 1 x d_h
  GruParams forward;
  GruParams backward;
  Matrix output_weight;  // 2 d_h x |S_pi|
  Matrix output_bias;    // 1 x |S_pi|
  // Bumped by every optimizer step; caches remember the value they saw.
  uint64_t version = 0;

  // All tensors in checkpoint order.
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;

  static ModelParams zeros(const AmShape& shape);
  // Uniform in +-1/sqrt(fan_in), deterministic per seed.
  static ModelParams random(const AmShape& shape, uint64_t seed);

  size_t num_values() const;
  void set_zero();
  void add_scaled(const ModelParams& other, double scale);
  double squared_norm() const;
};

// Per-direction hidden state carried into a forward pass.
struct RecurrentState {
  Vector forward;
  Vector backward;
};

// T x 2 d_h hidden states; row t is [forward_t, backward_t].
using HiddenTrace = Matrix;

struct AmCache {
  uint64_t params_version = 0;
  AmShape shape;
  Matrix features;
  Matrix projected;    // T x d_h
  HiddenTrace hidden;  // T x 2 d_h
  struct Direction {
    Matrix h_prev, z, r, c, n;  // T x d_h, indexed by frame
  } dirs[2];
};

struct AmOutput {
  FrameLogits logits;
  HiddenTrace hidden;
  AmCache cache;
  // Forward-direction state after the last frame.
  Vector final_forward;
};

AmOutput am_forward(const ModelParams& params, const Matrix& features,
                    const std::optional<RecurrentState>& initial = std::nullopt);

// Exact gradient of a loss that depends on the logits and, optionally, on the
// hidden trace. Throws if `params` changed since the cache was produced.
ModelParams am_backward(const ModelParams& params, const AmCache& cache, const Matrix& grad_logits,
                        const Matrix* grad_hidden = nullptr);

struct OptimConfig {
  double learning_rate = 1e-3;
  double clip_norm = 5.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimState {
  OptimConfig config;
  ModelParams first_moment;
  ModelParams second_moment;
  int64_t step = 0;

  static OptimState init(const ModelParams& params, const OptimConfig& config);
};

struct StepReport {
  double grad_norm = 0.0;   // before clipping
  double clip_scale = 1.0;  // factor applied to the gradient
};

// Adam update with global-norm clipping applied before the moment update.
StepReport optimizer_step(ModelParams& params, const ModelParams& grads, OptimState& opt);

// Binary checkpoint: "CDAM", u32 version, u32 d_in, u32 d_h, u32 |S_pi|,
// then every tensor in tensors() order as little-endian float64.
void write_checkpoint(const ModelParams& params, const std::string& path);
ModelParams read_checkpoint(const std::string& path);

}  // namespace catdesk

#endif  // CATDESK_AM_H_
