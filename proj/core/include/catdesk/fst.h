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

#ifndef CATDESK_FST_H_
#define CATDESK_FST_H_

#include <limits>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "catdesk/log_math.h"
#include "catdesk/types.h"

namespace catdesk {

// Arc weights are log-domain reals (log probabilities, larger is better).
// kLogZero means "absent". The text format stores costs (negated weights).
struct Arc {
  Label ilabel = kEpsilon;
  Label olabel = kEpsilon;
  double weight = 0.0;
  StateId nextstate = kNoState;
};

// Weighted finite-state transducer in adjacency-list form. Built once and
// then passed around by const reference; nothing mutates a Wfst after
// construction, so concurrent readers need no locking.
class Wfst {
 public:
  StateId add_state();
  void add_states(int n);
  void set_start(StateId s);
  void set_final(StateId s, double weight = 0.0);
  void add_arc(StateId src, const Arc& arc);
  void add_arc(StateId src, StateId dst, Label ilabel, Label olabel, double weight = 0.0) {
    add_arc(src, Arc{ilabel, olabel, weight, dst});
  }

  StateId start() const { return start_; }
  int num_states() const { return static_cast<int>(arcs_.size()); }
  size_t num_arcs() const;
  bool empty() const { return start_ == kNoState; }

  std::span<const Arc> arcs(StateId s) const { return arcs_[check(s)]; }
  double final_weight(StateId s) const { return finals_[check(s)]; }
  bool is_final(StateId s) const { return final_weight(s) != kLogZero; }

  // Non-epsilon labels on the input / output side.
  std::set<Label> input_alphabet() const;
  std::set<Label> output_alphabet() const;

 private:
  size_t check(StateId s) const;

  std::vector<std::vector<Arc>> arcs_;
  std::vector<double> finals_;
  StateId start_ = kNoState;
};

struct ComposeOptions {
  // Reject when a's output alphabet is not contained in b's input alphabet.
  bool check_alphabets = true;
};

// Log-semiring composition with the three-state epsilon filter.
Wfst compose(const Wfst& a, const Wfst& b, ComposeOptions options = {});

// Keeps only states on some start-to-final path. States keep their relative
// order. An FST with no accepting path becomes the empty machine.
Wfst trim(const Wfst& f);

// Acceptor for exactly one sequence, weight 0.
Wfst linear_acceptor(std::span<const Label> labels);

// States ordered so every epsilon-input arc goes forward. Throws if the
// epsilon-input subgraph has a cycle.
std::vector<StateId> epsilon_topological_order(const Wfst& f);

struct WeightedSequence {
  LabelSeq input;
  double weight = kLogZero;
  friend bool operator==(const WeightedSequence&, const WeightedSequence&) = default;
};

struct WeightedPair {
  LabelSeq input;
  LabelSeq output;
  double weight = kLogZero;
};

inline constexpr int kMaxEnumerationLength = 12;

// Every accepted input sequence of length <= max_len with its log-summed
// weight, sorted lexicographically. Brute force; used as a test oracle.
std::vector<WeightedSequence> enumerate_language(const Wfst& f, int max_len);

// Same, keeping input/output pairs apart.
std::vector<WeightedPair> enumerate_relation(const Wfst& f, int max_len);

struct PathWeight {
  double total = kLogZero;
  LabelSeq input;   // epsilon removed; one label per frame when emissions are used
  LabelSeq output;  // epsilon removed
};

// Best (max-weight) path. Ties go to the lexicographically smaller output.
PathWeight shortest_path(const Wfst& f);

// Best path consuming exactly emissions.rows() frames; frame t adds
// emissions(t, emission_column(ilabel)) to the path weight.
PathWeight shortest_path(const Wfst& f, const FrameLogits& emissions);

struct ViterbiOptions {
  double beam = std::numeric_limits<double>::infinity();
  int max_active = std::numeric_limits<int>::max();
};

// Token-passing Viterbi shared by shortest_path(f, emissions) and the beam
// decoder. With default options no token is ever pruned.
PathWeight viterbi(const Wfst& f, const FrameLogits& emissions, const ViterbiOptions& options);

}  // namespace catdesk

#endif  // CATDESK_FST_H_
