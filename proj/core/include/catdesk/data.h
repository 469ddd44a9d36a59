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

#ifndef CATDESK_DATA_H_
#define CATDESK_DATA_H_

#include <cstdint>
#include <string>
#include <vector>

#include "catdesk/fst_io.h"
#include "catdesk/types.h"

namespace catdesk {

// Synthetic corpus recipe: each label owns a mean feature vector; frames are
// mean + N(0, noise_std^2) for a sampled number of frames per label.
struct SynthSpec {
  int alphabet_size = 3;
  int input_dim = 2;
  double noise_std = 0.3;
  int min_duration = 2;
  int max_duration = 6;
  int min_labels = 3;
  int max_labels = 8;
  int num_utterances = 250;
  // Probability of following each label with its fixed successor; the rest
  // is spread uniformly over the other non-repeating labels.
  double successor_bias = 0.6;
  uint64_t seed = 1;
  Matrix means;  // K x d_in; empty selects default_means()

  void validate() const;
};

// K means evenly spaced on the unit circle in the first two dimensions; any
// further dimensions get a deterministic offset so means stay distinct.
Matrix default_means(int alphabet_size, int input_dim);

struct Utterance {
  std::string id;
  Matrix features;          // T x d_in
  LabelSeq transcript;
  Alignment frame_labels;   // generating label per frame (synthetic only; not serialized)
};

struct Corpus {
  std::vector<Utterance> train;
  std::vector<Utterance> dev;
  std::vector<Utterance> test;
  Matrix means;
};

// Deterministic per seed; 80/10/10 split in generation order.
Corpus synth_corpus(const SynthSpec& spec);

// Directory with `feats.bin` and `text`.
//   feats.bin: "CDFT", u32 version, u64 count, then per utterance
//              u32 id length, id bytes, u32 T, u32 d_in, T*d_in float64 (LE)
//   text:      utt-id label label ...
void write_corpus(const std::vector<Utterance>& utts, const std::string& dir, const SymbolTable& labels);
std::vector<Utterance> read_corpus(const std::string& dir, const SymbolTable& labels);

// Nearest-mean label per frame; a model-free baseline for frame separability.
Alignment nearest_mean_labels(const Matrix& features, const Matrix& means);

}  // namespace catdesk

#endif  // CATDESK_DATA_H_
