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

#ifndef CATDESK_DECODE_H_
#define CATDESK_DECODE_H_

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "catdesk/fst.h"
#include "catdesk/fst_io.h"
#include "catdesk/lm.h"

namespace catdesk {

inline constexpr double kDefaultBeam = 16.0;
inline constexpr int kDefaultMaxActive = 2000;

// word -> pronunciations over S_l.
struct Lexicon {
  std::map<std::string, std::vector<LabelSeq>> entries;

  void add(const std::string& word, LabelSeq pronunciation);
  std::vector<std::string> words() const;
};

// `word label label ...` per line; labels resolved through `labels`.
Lexicon read_lexicon(std::istream& is, const SymbolTable& labels);

// <eps> 0 then the given words at 1..n in sorted order.
SymbolTable make_word_symbols(const std::vector<std::string>& words);

// Loop transducer from labels to words: each pronunciation is a chain that
// emits the word on its first arc and returns to the loop state through an
// epsilon arc. The loop state is the start and the only final state.
Wfst lexicon_to_fst(const Lexicon& lexicon, const SymbolTable& words);

// trim(compose(compose(topology, lexicon), G)): S_pi frames in, words out.
Wfst build_decode_graph(const Wfst& topology, const Lexicon& lexicon, const NGramLm& word_lm,
                        const SymbolTable& words);

struct Hypothesis {
  std::vector<int> tokens;  // output symbols of the graph
  double score = kLogZero;  // graph weight + scaled acoustic log-probs
  Alignment alignment;      // one S_pi label per frame
};

struct DecodeOptions {
  double beam = kDefaultBeam;
  int max_active = kDefaultMaxActive;
  double acoustic_scale = 1.0;
};

// Viterbi beam search. Logits are log-softmaxed first. Throws NoPathError
// when pruning (or the graph) leaves no complete path.
Hypothesis beam_decode(const Wfst& graph, const FrameLogits& logits, const DecodeOptions& options = {});

// Per-frame argmax (ties to the lower label id), then collapse.
LabelSeq greedy_decode(const FrameLogits& logits);

struct EditStats {
  int distance = 0;
  int substitutions = 0;
  int insertions = 0;
  int deletions = 0;
  int ref_length = 0;

  EditStats& operator+=(const EditStats& o) {
    distance += o.distance;
    substitutions += o.substitutions;
    insertions += o.insertions;
    deletions += o.deletions;
    ref_length += o.ref_length;
    return *this;
  }
  double error_rate() const { return ref_length == 0 ? (distance == 0 ? 0.0 : 1.0) : double(distance) / ref_length; }
};

// Unit-cost Levenshtein with a backtrace that prefers substitution (or
// match), then insertion, then deletion.
template <typename T>
EditStats edit_distance(std::span<const T> ref, std::span<const T> hyp) {
  const size_t n = ref.size(), m = hyp.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
  for (size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const int sub = d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      d[i][j] = std::min({sub, d[i][j - 1] + 1, d[i - 1][j] + 1});
    }
  }
  EditStats s;
  s.distance = d[n][m];
  s.ref_length = static_cast<int>(n);
  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++s.substitutions;
      --i;
      --j;
    } else if (j > 0 && d[i][j] == d[i][j - 1] + 1) {
      ++s.insertions;
      --j;
    } else {
      ++s.deletions;
      --i;
    }
  }
  return s;
}

template <typename T>
EditStats edit_distance(const std::vector<T>& ref, const std::vector<T>& hyp) {
  return edit_distance<T>(std::span<const T>(ref), std::span<const T>(hyp));
}

// Hypothesis / reference lines: `utt-id <TAB> score <TAB> tokens`.
struct TranscriptLine {
  std::string id;
  double score = 0.0;
  std::vector<std::string> tokens;
};

void write_hypothesis_line(std::ostream& os, const TranscriptLine& line);
// Accepts the tabbed format and plain `utt-id tok tok ...` lines.
std::vector<TranscriptLine> read_transcript_lines(std::istream& is);

struct ScoreReport {
  EditStats stats;
  int utterances = 0;
  int missing = 0;  // references without a hypothesis (scored as all deletions)
};

// Scores hypotheses against references by utterance id.
ScoreReport score_transcripts(const std::vector<TranscriptLine>& refs, const std::vector<TranscriptLine>& hyps);

// "PER 0.123 S 1 I 2 D 3"
std::string format_score(const ScoreReport& report);

}  // namespace catdesk

#endif  // CATDESK_DECODE_H_
