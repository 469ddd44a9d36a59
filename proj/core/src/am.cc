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

#include "catdesk/am.h"

#include <cmath>
#include <random>
#include <string>

namespace catdesk {

namespace {

std::vector<Matrix*> gru_tensors(GruParams& g) {
  return {&g.w_z, &g.w_r, &g.w_n, &g.u_z, &g.u_r, &g.u_n, &g.b_z, &g.b_r, &g.b_n};
}

GruParams gru_zeros(int d_h) {
  GruParams g;
  for (Matrix* m : gru_tensors(g)) *m = Matrix::Zero(d_h, d_h);
  g.b_z = g.b_r = g.b_n = Matrix::Zero(1, d_h);
  return g;
}

Eigen::RowVectorXd sigmoid(const Eigen::RowVectorXd& x) {
  return (1.0 + (-x.array()).exp()).inverse().matrix();
}

}  // namespace

std::vector<Matrix*> ModelParams::tensors() {
  std::vector<Matrix*> out{&input_weight, &input_bias};
  for (Matrix* m : gru_tensors(forward)) out.push_back(m);
  for (Matrix* m : gru_tensors(backward)) out.push_back(m);
  out.push_back(&output_weight);
  out.push_back(&output_bias);
  return out;
}

std::vector<const Matrix*> ModelParams::tensors() const {
  auto mut = const_cast<ModelParams*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

ModelParams ModelParams::zeros(const AmShape& shape) {
  if (shape.input_dim < 1 || shape.hidden_dim < 1 || shape.num_emissions < 2)
    throw Error("invalid acoustic model shape");
  ModelParams p;
  p.shape = shape;
  p.input_weight = Matrix::Zero(shape.input_dim, shape.hidden_dim);
  p.input_bias = Matrix::Zero(1, shape.hidden_dim);
  p.forward = gru_zeros(shape.hidden_dim);
  p.backward = gru_zeros(shape.hidden_dim);
  p.output_weight = Matrix::Zero(2 * shape.hidden_dim, shape.num_emissions);
  p.output_bias = Matrix::Zero(1, shape.num_emissions);
  return p;
}

ModelParams ModelParams::random(const AmShape& shape, uint64_t seed) {
  ModelParams p = zeros(shape);
  std::mt19937_64 rng(seed);
  auto fill = [&](Matrix& m, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  };
  fill(p.input_weight, shape.input_dim);
  fill(p.input_bias, shape.input_dim);
  for (GruParams* g : {&p.forward, &p.backward}) {
    for (Matrix* m : gru_tensors(*g)) fill(*m, shape.hidden_dim);
  }
  fill(p.output_weight, 2 * shape.hidden_dim);
  fill(p.output_bias, 2 * shape.hidden_dim);
  return p;
}

size_t ModelParams::num_values() const {
  size_t n = 0;
  for (const Matrix* m : tensors()) n += static_cast<size_t>(m->size());
  return n;
}

void ModelParams::set_zero() {
  for (Matrix* m : tensors()) m->setZero();
}

void ModelParams::add_scaled(const ModelParams& other, double scale) {
  if (!(shape == other.shape)) throw Error("parameter shape mismatch");
  auto dst = tensors();
  auto src = other.tensors();
  for (size_t i = 0; i < dst.size(); ++i) *dst[i] += scale * *src[i];
}

double ModelParams::squared_norm() const {
  double s = 0.0;
  for (const Matrix* m : tensors()) s += m->squaredNorm();
  return s;
}

AmOutput am_forward(const ModelParams& params, const Matrix& features,
                    const std::optional<RecurrentState>& initial) {
  const AmShape& shape = params.shape;
  if (features.cols() != shape.input_dim) {
    throw Error("feature width " + std::to_string(features.cols()) + " does not match d_in " +
                std::to_string(shape.input_dim));
  }
  const Eigen::Index frames = features.rows();
  const int d_h = shape.hidden_dim;

  AmOutput out;
  AmCache& cache = out.cache;
  cache.params_version = params.version;
  cache.shape = shape;
  cache.features = features;
  cache.projected = features * params.input_weight;
  cache.projected.rowwise() += params.input_bias.row(0);
  cache.hidden = Matrix::Zero(frames, 2 * d_h);

  for (int d = 0; d < 2; ++d) {
    const GruParams& g = d == 0 ? params.forward : params.backward;
    auto& dc = cache.dirs[d];
    for (Matrix* m : {&dc.h_prev, &dc.z, &dc.r, &dc.c, &dc.n}) *m = Matrix::Zero(frames, d_h);
    Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(d_h);
    if (initial) {
      const Vector& init = d == 0 ? initial->forward : initial->backward;
      if (init.size() == d_h) h = init.transpose();
      else if (init.size() != 0) throw Error("initial state has wrong width");
    }
    for (Eigen::Index step = 0; step < frames; ++step) {
      const Eigen::Index t = d == 0 ? step : frames - 1 - step;
      const Eigen::RowVectorXd p = cache.projected.row(t);
      const Eigen::RowVectorXd z = sigmoid(p * g.w_z + h * g.u_z + g.b_z);
      const Eigen::RowVectorXd r = sigmoid(p * g.w_r + h * g.u_r + g.b_r);
      const Eigen::RowVectorXd c = h * g.u_n;
      const Eigen::RowVectorXd n =
          (p * g.w_n + g.b_n + r.cwiseProduct(c)).array().tanh().matrix();
      dc.h_prev.row(t) = h;
      dc.z.row(t) = z;
      dc.r.row(t) = r;
      dc.c.row(t) = c;
      dc.n.row(t) = n;
      h = (1.0 - z.array()).matrix().cwiseProduct(n) + z.cwiseProduct(h);
      cache.hidden.block(t, d * d_h, 1, d_h) = h;
    }
    if (d == 0) out.final_forward = h.transpose();
  }
  out.hidden = cache.hidden;
  out.logits = cache.hidden * params.output_weight;
  out.logits.rowwise() += params.output_bias.row(0);
  return out;
}

ModelParams am_backward(const ModelParams& params, const AmCache& cache, const Matrix& grad_logits,
                        const Matrix* grad_hidden) {
  if (cache.params_version != params.version || !(cache.shape == params.shape)) {
    throw Error("stale forward cache: parameters changed since the forward pass");
  }
  const Eigen::Index frames = cache.features.rows();
  const int d_h = params.shape.hidden_dim;
  if (grad_logits.rows() != frames || grad_logits.cols() != params.shape.num_emissions)
    throw Error("grad_logits shape mismatch");
  if (grad_hidden && (grad_hidden->rows() != frames || grad_hidden->cols() != 2 * d_h))
    throw Error("grad_hidden shape mismatch");

  ModelParams grads = ModelParams::zeros(params.shape);
  grads.output_weight = cache.hidden.transpose() * grad_logits;
  grads.output_bias = grad_logits.colwise().sum();
  Matrix d_hidden = grad_logits * params.output_weight.transpose();
  if (grad_hidden) d_hidden += *grad_hidden;

  Matrix d_projected = Matrix::Zero(frames, d_h);
  for (int d = 0; d < 2; ++d) {
    const GruParams& g = d == 0 ? params.forward : params.backward;
    GruParams& dg = d == 0 ? grads.forward : grads.backward;
    const auto& dc = cache.dirs[d];
    Eigen::RowVectorXd carry = Eigen::RowVectorXd::Zero(d_h);
    for (Eigen::Index step = frames - 1; step >= 0; --step) {
      const Eigen::Index t = d == 0 ? step : frames - 1 - step;
      const Eigen::RowVectorXd p = cache.projected.row(t);
      const Eigen::RowVectorXd h_prev = dc.h_prev.row(t);
      const Eigen::RowVectorXd z = dc.z.row(t), r = dc.r.row(t), c = dc.c.row(t), n = dc.n.row(t);
      const Eigen::RowVectorXd dh = d_hidden.block(t, d * d_h, 1, d_h) + carry;

      const Eigen::RowVectorXd dn = dh.cwiseProduct((1.0 - z.array()).matrix());
      const Eigen::RowVectorXd dz = dh.cwiseProduct(h_prev - n);
      Eigen::RowVectorXd dh_prev = dh.cwiseProduct(z);

      const Eigen::RowVectorXd da_n = dn.cwiseProduct((1.0 - n.array().square()).matrix());
      const Eigen::RowVectorXd dr = da_n.cwiseProduct(c);
      const Eigen::RowVectorXd dcand = da_n.cwiseProduct(r);
      const Eigen::RowVectorXd da_z = dz.cwiseProduct((z.array() * (1.0 - z.array())).matrix());
      const Eigen::RowVectorXd da_r = dr.cwiseProduct((r.array() * (1.0 - r.array())).matrix());

      dg.w_n += p.transpose() * da_n;
      dg.b_n += da_n;
      dg.u_n += h_prev.transpose() * dcand;
      dg.w_z += p.transpose() * da_z;
      dg.u_z += h_prev.transpose() * da_z;
      dg.b_z += da_z;
      dg.w_r += p.transpose() * da_r;
      dg.u_r += h_prev.transpose() * da_r;
      dg.b_r += da_r;

      d_projected.row(t) += da_n * g.w_n.transpose() + da_z * g.w_z.transpose() + da_r * g.w_r.transpose();
      dh_prev += dcand * g.u_n.transpose() + da_z * g.u_z.transpose() + da_r * g.u_r.transpose();
      carry = dh_prev;
    }
  }
  grads.input_weight = cache.features.transpose() * d_projected;
  grads.input_bias = d_projected.colwise().sum();
  return grads;
}

}  // namespace catdesk
