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

#ifndef CATDESK_TOPOLOGY_H_
#define CATDESK_TOPOLOGY_H_

#include <span>
#include <vector>

#include "catdesk/fst.h"

namespace catdesk {

// The CTC collapsing map: merge adjacent repeats, then drop blanks.
LabelSeq ctc_collapse(std::span<const Label> alignment);

// Brute force over all |S_pi|^frames strings; keeps those collapsing to
// `labels`. Results are in lexicographic order of label ids.
std::vector<Alignment> enumerate_alignments(std::span<const Label> labels, int frames,
                                            std::span<const Label> alphabet);

// Minimal CTC topology over `alphabet` (blank added implicitly). Input labels
// are S_pi symbols, output is the collapsed label sequence, all weights 0.
//
// States: 0 is the start, 1 is "last emitted blank", 2 + k is "last emitted
// alphabet[k]". Every state is final.
Wfst build_ctc_topology(std::span<const Label> alphabet);

// Alignment lattice of one transcript: trim(compose(topology, acceptor(l))).
Wfst numerator_graph(std::span<const Label> labels, const Wfst& topology);

// Smallest frame count that can carry `labels` (one frame per label plus a
// blank between each adjacent repeat).
int min_frames(std::span<const Label> labels);

}  // namespace catdesk

#endif  // CATDESK_TOPOLOGY_H_
