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

#ifndef CATDESK_LOSS_H_
#define CATDESK_LOSS_H_

#include <span>

#include "catdesk/fst.h"
#include "catdesk/lm.h"

namespace catdesk {

// Auxiliary CTC weight used when none is configured.
inline constexpr double kDefaultCtcWeight = 0.01;

// Row-wise log-softmax with max subtraction.
FrameLogits log_softmax_rows(const FrameLogits& logits);
Matrix softmax_rows(const FrameLogits& logits);

struct ForwardBackward {
  double log_z = kLogZero;
  bool feasible = false;
  // T x |S_pi| posterior that frame t consumes each emission symbol. Empty
  // when no length-T path exists.
  Matrix occupancy;
};

// Log-semiring forward-backward over `g` with one emitting arc per frame.
// Epsilon-input arcs consume no frame and are closed per time step in
// topological order; an epsilon cycle is rejected.
ForwardBackward graph_forward_backward(const Wfst& g, const FrameLogits& emissions);

struct CtcLoss {
  double loss = 0.0;
  Matrix grad;  // d loss / d logits
};

// Standard CTC over the blank-interleaved label sequence, computed directly
// on the (2L+1)-state lattice without any FST machinery.
CtcLoss ctc_loss(const FrameLogits& logits, std::span<const Label> labels);

struct LossReport {
  double crf_loss = 0.0;
  double ctc_aux_loss = 0.0;
  double total = 0.0;
  Matrix grad_logits;
};

// CTC-CRF loss: -(logZ_num + edge_potential) + logZ_den on log-softmaxed
// logits, plus ctc_weight * CTC. The edge potential log p(l) shifts the value
// only; it has no gradient.
LossReport ctc_crf_loss(const FrameLogits& logits, std::span<const Label> labels, const Wfst& topology,
                        const DenominatorGraph& den, double edge_potential, double ctc_weight);

// Bundles the graphs one training run evaluates every utterance against.
// Holds references; the caller keeps the graphs and LM alive.
class CtcCrfObjective {
 public:
  // `lm` may be null, in which case the edge potential is zero.
  CtcCrfObjective(const Wfst& topology, const DenominatorGraph& den, const NGramLm* lm,
                  const SymbolTable& symbols, double ctc_weight = kDefaultCtcWeight);

  LossReport operator()(const FrameLogits& logits, std::span<const Label> labels) const;

  double ctc_weight() const { return ctc_weight_; }

 private:
  const Wfst& topology_;
  const DenominatorGraph& den_;
  const NGramLm* lm_;
  const SymbolTable& symbols_;
  double ctc_weight_;
};

}  // namespace catdesk

#endif  // CATDESK_LOSS_H_
