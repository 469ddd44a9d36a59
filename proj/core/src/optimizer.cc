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

#include <cmath>

#include "catdesk/am.h"

namespace catdesk {

OptimState OptimState::init(const ModelParams& params, const OptimConfig& config) {
  if (!(config.learning_rate > 0.0)) throw Error("learning rate must be positive");
  if (!(config.clip_norm > 0.0)) throw Error("clip norm must be positive");
  OptimState s;
  s.config = config;
  s.first_moment = ModelParams::zeros(params.shape);
  s.second_moment = ModelParams::zeros(params.shape);
  return s;
}

StepReport optimizer_step(ModelParams& params, const ModelParams& grads, OptimState& opt) {
  if (!(params.shape == grads.shape) || !(params.shape == opt.first_moment.shape)) {
    throw Error("optimizer: parameter, gradient and moment shapes differ");
  }
  StepReport report;
  report.grad_norm = std::sqrt(grads.squared_norm());
  if (!std::isfinite(report.grad_norm)) throw Error("optimizer: non-finite gradient");
  if (report.grad_norm > opt.config.clip_norm) report.clip_scale = opt.config.clip_norm / report.grad_norm;

  ++opt.step;
  const OptimConfig& c = opt.config;
  const double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(opt.step));
  const double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(opt.step));
  auto p = params.tensors();
  auto g = grads.tensors();
  auto m = opt.first_moment.tensors();
  auto v = opt.second_moment.tensors();
  for (size_t i = 0; i < p.size(); ++i) {
    const Matrix clipped = report.clip_scale * *g[i];
    *m[i] = c.beta1 * *m[i] + (1.0 - c.beta1) * clipped;
    *v[i] = c.beta2 * *v[i] + (1.0 - c.beta2) * clipped.cwiseProduct(clipped);
    const Matrix m_hat = *m[i] / bias1;
    const Matrix v_hat = *v[i] / bias2;
    *p[i] -= (c.learning_rate * m_hat.array() / (v_hat.array().sqrt() + c.epsilon)).matrix();
  }
  ++params.version;
  return report;
}

}  // namespace catdesk
