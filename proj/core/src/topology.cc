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

#include "catdesk/topology.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace catdesk {

LabelSeq ctc_collapse(std::span<const Label> alignment) {
  LabelSeq out;
  Label prev = kEpsilon;
  for (Label l : alignment) {
    if (l != prev && l != kBlank) out.push_back(l);
    prev = l;
  }
  return out;
}

std::vector<Alignment> enumerate_alignments(std::span<const Label> labels, int frames,
                                            std::span<const Label> alphabet) {
  if (frames < 0 || frames > 10) throw OverflowError("enumerate_alignments: frames must be in [0, 10]");
  const size_t symbols = alphabet.size() + 1;
  if (std::pow(static_cast<double>(symbols), frames) > 1e7) {
    throw OverflowError("enumerate_alignments: |S_pi|^T exceeds 1e7");
  }
  std::vector<Label> emissions{kBlank};
  emissions.insert(emissions.end(), alphabet.begin(), alphabet.end());
  std::sort(emissions.begin(), emissions.end());

  std::vector<Alignment> out;
  std::vector<size_t> digits(frames, 0);
  Alignment candidate(frames);
  const LabelSeq target(labels.begin(), labels.end());
  while (true) {
    for (int t = 0; t < frames; ++t) candidate[t] = emissions[digits[t]];
    if (ctc_collapse(candidate) == target) out.push_back(candidate);
    int pos = frames - 1;
    while (pos >= 0 && ++digits[pos] == symbols) digits[pos--] = 0;
    if (pos < 0) break;
  }
  return out;
}

Wfst build_ctc_topology(std::span<const Label> alphabet) {
  if (alphabet.empty()) throw Error("CTC topology needs a nonempty alphabet");
  for (Label l : alphabet) {
    if (l < kFirstSymbol) throw Error("alphabet contains reserved label " + std::to_string(l));
  }
  const int k = static_cast<int>(alphabet.size());
  Wfst f;
  f.add_states(k + 2);
  f.set_start(0);
  const StateId blank_state = 1;
  for (StateId s = 0; s < k + 2; ++s) f.set_final(s);

  for (StateId s = 0; s < k + 2; ++s) {
    f.add_arc(s, blank_state, kBlank, kEpsilon);
    for (int j = 0; j < k; ++j) {
      const StateId dst = 2 + j;
      // Staying on the same label consumes a repeat without emitting.
      f.add_arc(s, dst, alphabet[j], s == dst ? kEpsilon : alphabet[j]);
    }
  }
  return f;
}

Wfst numerator_graph(std::span<const Label> labels, const Wfst& topology) {
  const auto outputs = topology.output_alphabet();
  for (Label l : labels) {
    if (!outputs.contains(l)) {
      throw Error("label " + std::to_string(l) + " is not in the topology's output alphabet");
    }
  }
  return trim(compose(topology, linear_acceptor(labels), ComposeOptions{.check_alphabets = false}));
}

int min_frames(std::span<const Label> labels) {
  int n = static_cast<int>(labels.size());
  for (size_t i = 1; i < labels.size(); ++i)
    if (labels[i] == labels[i - 1]) ++n;
  return n;
}

}  // namespace catdesk
