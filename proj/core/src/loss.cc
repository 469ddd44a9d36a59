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

#include "catdesk/loss.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "catdesk/topology.h"

namespace catdesk {

FrameLogits log_softmax_rows(const FrameLogits& logits) {
  FrameLogits out(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const double max = logits.row(t).maxCoeff();
    const double lse = max + std::log((logits.row(t).array() - max).exp().sum());
    out.row(t) = logits.row(t).array() - lse;
  }
  return out;
}

Matrix softmax_rows(const FrameLogits& logits) { return log_softmax_rows(logits).array().exp(); }

ForwardBackward graph_forward_backward(const Wfst& g, const FrameLogits& emissions) {
  ForwardBackward result;
  if (g.empty()) return result;
  for (Label l : g.input_alphabet()) {
    if (emission_column(l) >= emissions.cols()) {
      throw Error("forward-backward: label " + std::to_string(l) + " has no emission column");
    }
  }
  const auto order = epsilon_topological_order(g);
  const int n = g.num_states();
  const Eigen::Index frames = emissions.rows();

  Matrix alpha = Matrix::Constant(frames + 1, n, kLogZero);
  Matrix beta = Matrix::Constant(frames + 1, n, kLogZero);

  auto close_forward = [&](Eigen::Index t) {
    for (StateId s : order) {
      const double a = alpha(t, s);
      if (a == kLogZero) continue;
      for (const Arc& arc : g.arcs(s)) {
        if (arc.ilabel != kEpsilon) continue;
        alpha(t, arc.nextstate) = log_add(alpha(t, arc.nextstate), a + arc.weight);
      }
    }
  };
  auto close_backward = [&](Eigen::Index t) {
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      for (const Arc& arc : g.arcs(*it)) {
        if (arc.ilabel != kEpsilon) continue;
        beta(t, *it) = log_add(beta(t, *it), arc.weight + beta(t, arc.nextstate));
      }
    }
  };

  alpha(0, g.start()) = 0.0;
  close_forward(0);
  for (Eigen::Index t = 1; t <= frames; ++t) {
    for (StateId s = 0; s < n; ++s) {
      const double a = alpha(t - 1, s);
      if (a == kLogZero) continue;
      for (const Arc& arc : g.arcs(s)) {
        if (arc.ilabel == kEpsilon) continue;
        const double v = a + arc.weight + emissions(t - 1, emission_column(arc.ilabel));
        alpha(t, arc.nextstate) = log_add(alpha(t, arc.nextstate), v);
      }
    }
    close_forward(t);
  }

  double log_z = kLogZero;
  for (StateId s = 0; s < n; ++s) {
    if (g.is_final(s)) log_z = log_add(log_z, alpha(frames, s) + g.final_weight(s));
  }
  result.log_z = log_z;
  if (log_z == kLogZero) return result;
  result.feasible = true;

  for (StateId s = 0; s < n; ++s) beta(frames, s) = g.final_weight(s);
  close_backward(frames);
  result.occupancy = Matrix::Zero(frames, emissions.cols());
  for (Eigen::Index t = frames; t >= 1; --t) {
    for (StateId s = 0; s < n; ++s) {
      const double a = alpha(t - 1, s);
      for (const Arc& arc : g.arcs(s)) {
        if (arc.ilabel == kEpsilon) continue;
        const double b = beta(t, arc.nextstate);
        if (b == kLogZero) continue;
        const double e = emissions(t - 1, emission_column(arc.ilabel));
        beta(t - 1, s) = log_add(beta(t - 1, s), arc.weight + e + b);
        if (a != kLogZero) {
          result.occupancy(t - 1, emission_column(arc.ilabel)) += std::exp(a + arc.weight + e + b - log_z);
        }
      }
    }
    close_backward(t - 1);
  }
  return result;
}

CtcLoss ctc_loss(const FrameLogits& logits, std::span<const Label> labels) {
  const Eigen::Index frames = logits.rows();
  if (min_frames(labels) > frames) {
    throw InfeasibleUtterance("CTC: " + std::to_string(labels.size()) + " labels need at least " +
                              std::to_string(min_frames(labels)) + " frames, got " +
                              std::to_string(frames));
  }
  for (Label l : labels) {
    if (l < kFirstSymbol || emission_column(l) >= logits.cols())
      throw Error("CTC: label " + std::to_string(l) + " outside the emission alphabet");
  }
  const FrameLogits lp = log_softmax_rows(logits);
  std::vector<Label> ext{kBlank};
  for (Label l : labels) {
    ext.push_back(l);
    ext.push_back(kBlank);
  }
  const int s_count = static_cast<int>(ext.size());
  // A state may be entered from two back unless it is a blank or repeats the
  // label two positions back.
  auto can_skip = [&](int s) { return s >= 2 && ext[s] != kBlank && ext[s] != ext[s - 2]; };

  Matrix alpha = Matrix::Constant(frames, s_count, kLogZero);
  Matrix beta = Matrix::Constant(frames, s_count, kLogZero);
  if (frames == 0) {
    // Only the empty transcript is feasible on zero frames.
    return CtcLoss{0.0, Matrix::Zero(0, logits.cols())};
  }
  alpha(0, 0) = lp(0, emission_column(ext[0]));
  if (s_count > 1) alpha(0, 1) = lp(0, emission_column(ext[1]));
  for (Eigen::Index t = 1; t < frames; ++t) {
    for (int s = 0; s < s_count; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = log_add(a, alpha(t - 1, s - 1));
      if (can_skip(s)) a = log_add(a, alpha(t - 1, s - 2));
      if (a != kLogZero) alpha(t, s) = a + lp(t, emission_column(ext[s]));
    }
  }
  beta(frames - 1, s_count - 1) = lp(frames - 1, emission_column(ext[s_count - 1]));
  if (s_count > 1) beta(frames - 1, s_count - 2) = lp(frames - 1, emission_column(ext[s_count - 2]));
  for (Eigen::Index t = frames - 2; t >= 0; --t) {
    for (int s = 0; s < s_count; ++s) {
      double b = beta(t + 1, s);
      if (s + 1 < s_count) b = log_add(b, beta(t + 1, s + 1));
      if (s + 2 < s_count && can_skip(s + 2)) b = log_add(b, beta(t + 1, s + 2));
      if (b != kLogZero) beta(t, s) = b + lp(t, emission_column(ext[s]));
    }
  }
  double log_z = alpha(frames - 1, s_count - 1);
  if (s_count > 1) log_z = log_add(log_z, alpha(frames - 1, s_count - 2));
  if (log_z == kLogZero) throw InfeasibleUtterance("CTC: no alignment");

  CtcLoss out;
  out.loss = -log_z;
  out.grad = lp.array().exp();
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int s = 0; s < s_count; ++s) {
      const double ab = alpha(t, s) + beta(t, s);
      if (ab == kLogZero) continue;
      const int col = emission_column(ext[s]);
      out.grad(t, col) -= std::exp(ab - lp(t, col) - log_z);
    }
  }
  return out;
}

LossReport ctc_crf_loss(const FrameLogits& logits, std::span<const Label> labels, const Wfst& topology,
                        const DenominatorGraph& den, double edge_potential, double ctc_weight) {
  if (ctc_weight < 0.0) throw Error("CTC weight must be non-negative");
  if (logits.cols() != den.num_emissions) {
    throw Error("logits have " + std::to_string(logits.cols()) + " columns, denominator expects " +
                std::to_string(den.num_emissions));
  }
  if (min_frames(labels) > logits.rows()) {
    throw InfeasibleUtterance("CTC-CRF: transcript of " + std::to_string(labels.size()) +
                              " labels cannot fit " + std::to_string(logits.rows()) + " frames");
  }
  const FrameLogits lp = log_softmax_rows(logits);
  const ForwardBackward num = graph_forward_backward(numerator_graph(labels, topology), lp);
  if (!num.feasible) throw InfeasibleUtterance("CTC-CRF: numerator graph has no path");
  const ForwardBackward den_fb = graph_forward_backward(den.graph, lp);
  if (!den_fb.feasible) throw Error("CTC-CRF: denominator graph has no length-T path");

  LossReport report;
  report.crf_loss = -(num.log_z + edge_potential) + den_fb.log_z;

  // d/d(log-probs) is occ_den - occ_num; chain through log-softmax.
  const Matrix grad_lp = den_fb.occupancy - num.occupancy;
  const Matrix probs = lp.array().exp();
  report.grad_logits = grad_lp - (probs.array().colwise() * grad_lp.rowwise().sum().array()).matrix();

  const CtcLoss ctc = ctc_loss(logits, labels);
  report.ctc_aux_loss = ctc.loss;
  report.total = report.crf_loss + ctc_weight * ctc.loss;
  if (ctc_weight != 0.0) report.grad_logits += ctc_weight * ctc.grad;
  return report;
}

CtcCrfObjective::CtcCrfObjective(const Wfst& topology, const DenominatorGraph& den, const NGramLm* lm,
                                 const SymbolTable& symbols, double ctc_weight)
    : topology_(topology), den_(den), lm_(lm), symbols_(symbols), ctc_weight_(ctc_weight) {
  if (ctc_weight < 0.0) throw Error("CTC weight must be non-negative");
}

LossReport CtcCrfObjective::operator()(const FrameLogits& logits, std::span<const Label> labels) const {
  const double edge = lm_ ? sentence_logprob(*lm_, labels, symbols_) : 0.0;
  return ctc_crf_loss(logits, labels, topology_, den_, edge, ctc_weight_);
}

}  // namespace catdesk
