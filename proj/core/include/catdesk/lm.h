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

#ifndef CATDESK_LM_H_
#define CATDESK_LM_H_

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "catdesk/fst.h"
#include "catdesk/fst_io.h"

namespace catdesk {

inline const std::string kSentenceBegin = "<s>";
inline const std::string kSentenceEnd = "</s>";

using NGram = std::vector<std::string>;

struct NGramEntry {
  double log10_prob = 0.0;
  double log10_backoff = 0.0;
  friend bool operator==(const NGramEntry&, const NGramEntry&) = default;
};

// Back-off n-gram model stored the way ARPA files store it: log10
// probabilities and log10 back-off weights, keyed by symbol strings.
class NGramLm {
 public:
  explicit NGramLm(int order);

  int order() const { return order_; }
  void set(const NGram& ngram, NGramEntry entry);
  const NGramEntry* find(const NGram& ngram) const;
  // Entries of one order (1-based).
  const std::map<NGram, NGramEntry>& entries(int n) const;

  // Unigram symbols other than <s> and </s>, sorted.
  std::vector<std::string> vocabulary() const;

  // Natural-log p(word | history) with standard back-off. `history` may be
  // longer than order - 1; only its tail is used.
  double log_prob(std::span<const std::string> history, const std::string& word) const;

  // Throws unless every n-gram's (n-1)-prefix is itself an entry.
  void validate() const;

  friend bool operator==(const NGramLm&, const NGramLm&) = default;

 private:
  int order_;
  std::vector<std::map<NGram, NGramEntry>> by_order_;
};

// Witten-Bell back-off estimate. `vocabulary` lists every symbol the model
// must cover (symbols absent from the corpus still get smoothed mass); corpus
// symbols outside it are an error.
NGramLm estimate_ngram(const std::vector<std::vector<std::string>>& transcripts, int order,
                       const std::vector<std::string>& vocabulary);

// Natural-log probability of the sentence including <s> and </s>.
double sentence_logprob(const NGramLm& lm, std::span<const std::string> words);
double sentence_logprob(const NGramLm& lm, std::span<const Label> labels, const SymbolTable& symbols);

// Log-sum over every path the LM acceptor admits for `words`: explicit
// n-gram arcs and epsilon back-off arcs both contribute. Computed from the
// n-gram table directly; this is the weight lm_to_fst assigns a sentence.
double sentence_logprob_all_paths(const NGramLm& lm, std::span<const std::string> words);
double sentence_logprob_all_paths(const NGramLm& lm, std::span<const Label> labels,
                                  const SymbolTable& symbols);

// Sum over the vocabulary and </s> of p(w | history).
double context_mass(const NGramLm& lm, const NGram& history);

// Contexts that carry a back-off weight, i.e. every entry of order < N that
// does not end in </s>, plus the empty context.
std::vector<NGram> lm_contexts(const NGramLm& lm);

// Acceptor over symbol ids: one state per context, n-gram arcs with natural
// log weights, epsilon back-off arcs, p(</s> | h) as final weights.
Wfst lm_to_fst(const NGramLm& lm, const SymbolTable& symbols);

void write_arpa(const NGramLm& lm, std::ostream& os);
NGramLm read_arpa(std::istream& is);
void write_arpa_file(const NGramLm& lm, const std::string& path);
NGramLm read_arpa_file(const std::string& path);

// T_den: trim(compose(topology, lm_to_fst(lm))).
struct DenominatorGraph {
  Wfst graph;
  int num_emissions = 0;
};

DenominatorGraph build_denominator(const Wfst& topology, const NGramLm& lm, const SymbolTable& symbols);

// Wraps an existing graph (e.g. one read from disk) after checking it is
// trim and only consumes S_pi symbols.
DenominatorGraph make_denominator(Wfst graph, int num_emissions);

// The topology alone as a denominator: all weights zero, no LM.
DenominatorGraph zero_weight_denominator(const Wfst& topology);

// Symbol-string view of a label sequence.
std::vector<std::string> to_symbols(std::span<const Label> labels, const SymbolTable& symbols);

}  // namespace catdesk

#endif  // CATDESK_LM_H_
