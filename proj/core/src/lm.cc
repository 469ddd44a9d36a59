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

#include "catdesk/lm.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "catdesk/log_math.h"

namespace catdesk {

namespace {

// log10 probability ARPA files use for "never predicted" (<s>).
constexpr double kLog10Zero = -99.0;

std::string join(const NGram& ngram) {
  std::string out;
  for (size_t i = 0; i < ngram.size(); ++i) out += (i ? " " : "") + ngram[i];
  return out;
}

NGram tail(std::span<const std::string> seq, size_t n) {
  const size_t k = std::min(n, seq.size());
  return NGram(seq.end() - static_cast<std::ptrdiff_t>(k), seq.end());
}

}  // namespace

NGramLm::NGramLm(int order) : order_(order), by_order_(order > 0 ? order : 0) {
  if (order < 1) throw Error("n-gram order must be >= 1");
}

void NGramLm::set(const NGram& ngram, NGramEntry entry) {
  if (ngram.empty() || static_cast<int>(ngram.size()) > order_) {
    throw Error("n-gram of length " + std::to_string(ngram.size()) + " does not fit order " +
                std::to_string(order_));
  }
  by_order_[ngram.size() - 1][ngram] = entry;
}

const NGramEntry* NGramLm::find(const NGram& ngram) const {
  if (ngram.empty() || static_cast<int>(ngram.size()) > order_) return nullptr;
  const auto& m = by_order_[ngram.size() - 1];
  auto it = m.find(ngram);
  return it == m.end() ? nullptr : &it->second;
}

const std::map<NGram, NGramEntry>& NGramLm::entries(int n) const {
  if (n < 1 || n > order_) throw Error("no entries of order " + std::to_string(n));
  return by_order_[n - 1];
}

std::vector<std::string> NGramLm::vocabulary() const {
  std::vector<std::string> out;
  for (const auto& [ngram, entry] : by_order_[0]) {
    if (ngram[0] != kSentenceBegin && ngram[0] != kSentenceEnd) out.push_back(ngram[0]);
  }
  return out;
}

double NGramLm::log_prob(std::span<const std::string> history, const std::string& word) const {
  NGram h = tail(history, static_cast<size_t>(order_ - 1));
  double backoff = 0.0;
  while (true) {
    NGram full = h;
    full.push_back(word);
    if (const NGramEntry* e = find(full)) return backoff + log10_to_ln(e->log10_prob);
    if (h.empty()) throw Error("symbol '" + word + "' is not in the LM vocabulary");
    if (const NGramEntry* ctx = find(h)) backoff += log10_to_ln(ctx->log10_backoff);
    h.erase(h.begin());
  }
}

void NGramLm::validate() const {
  for (int n = 2; n <= order_; ++n) {
    for (const auto& [ngram, entry] : by_order_[n - 1]) {
      NGram prefix(ngram.begin(), ngram.end() - 1);
      if (!find(prefix)) throw Error("n-gram '" + join(ngram) + "' has no prefix entry");
    }
  }
}

NGramLm estimate_ngram(const std::vector<std::vector<std::string>>& transcripts, int order,
                       const std::vector<std::string>& vocabulary) {
  if (transcripts.empty()) throw Error("estimate_ngram: empty corpus");
  if (order < 1 || order > 4) throw Error("estimate_ngram: order must be in 1..4");
  std::set<std::string> vocab(vocabulary.begin(), vocabulary.end());
  if (vocab.empty()) throw Error("estimate_ngram: empty vocabulary");
  if (vocab.contains(kSentenceBegin) || vocab.contains(kSentenceEnd))
    throw Error("estimate_ngram: vocabulary must not contain sentence markers");

  // counts[k][h][w]: occurrences of w after the (k)-token history h.
  std::vector<std::map<NGram, std::map<std::string, double>>> counts(order);
  for (const auto& sentence : transcripts) {
    std::vector<std::string> seq{kSentenceBegin};
    for (const auto& w : sentence) {
      if (!vocab.contains(w)) throw Error("estimate_ngram: symbol '" + w + "' not in vocabulary");
      seq.push_back(w);
    }
    seq.push_back(kSentenceEnd);
    for (size_t i = 1; i < seq.size(); ++i) {
      for (int k = 0; k < order && static_cast<int>(i) - k >= 0; ++k) {
        NGram h(seq.begin() + static_cast<std::ptrdiff_t>(i) - k, seq.begin() + static_cast<std::ptrdiff_t>(i));
        counts[k][h][seq[i]] += 1.0;
      }
    }
  }

  NGramLm lm(order);
  // Unigrams interpolate with the uniform distribution over vocab + </s>.
  std::vector<std::string> predictable(vocab.begin(), vocab.end());
  predictable.push_back(kSentenceEnd);
  const auto& uni = counts[0][NGram{}];
  double total = 0.0;
  for (const auto& [w, c] : uni) total += c;
  const double types = static_cast<double>(uni.size());
  const double uniform = 1.0 / static_cast<double>(predictable.size());
  for (const auto& w : predictable) {
    auto it = uni.find(w);
    const double c = it == uni.end() ? 0.0 : it->second;
    lm.set({w}, {std::log10((c + types * uniform) / (total + types)), 0.0});
  }
  lm.set({kSentenceBegin}, {kLog10Zero, 0.0});

  for (int k = 1; k < order; ++k) {
    for (const auto& [h, followers] : counts[k]) {
      double c_h = 0.0;
      for (const auto& [w, c] : followers) c_h += c;
      const double t_h = static_cast<double>(followers.size());
      NGram lower_h(h.begin() + 1, h.end());
      for (const auto& [w, c] : followers) {
        const double p_lower = std::exp(lm.log_prob(lower_h, w));
        NGram ngram = h;
        ngram.push_back(w);
        lm.set(ngram, {std::log10((c + t_h * p_lower) / (c_h + t_h)), 0.0});
      }
      NGramEntry ctx = *lm.find(h);
      ctx.log10_backoff = std::log10(t_h / (c_h + t_h));
      lm.set(h, ctx);
    }
  }
  return lm;
}

double sentence_logprob(const NGramLm& lm, std::span<const std::string> words) {
  std::vector<std::string> history{kSentenceBegin};
  double total = 0.0;
  for (const auto& w : words) {
    if (w == kSentenceBegin || w == kSentenceEnd) throw Error("sentence markers inside a sentence");
    total += lm.log_prob(history, w);
    history.push_back(w);
  }
  return total + lm.log_prob(history, kSentenceEnd);
}

std::vector<std::string> to_symbols(std::span<const Label> labels, const SymbolTable& symbols) {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (Label l : labels) out.push_back(symbols.symbol_of(l));
  return out;
}

double sentence_logprob(const NGramLm& lm, std::span<const Label> labels, const SymbolTable& symbols) {
  return sentence_logprob(lm, to_symbols(labels, symbols));
}

std::vector<NGram> lm_contexts(const NGramLm& lm) {
  std::vector<NGram> out{NGram{}};
  for (int n = 1; n < lm.order(); ++n) {
    for (const auto& [ngram, entry] : lm.entries(n)) {
      if (ngram.back() != kSentenceEnd) out.push_back(ngram);
    }
  }
  return out;
}

namespace {

// Context bookkeeping shared by the acceptor builder and the path-sum scorer.
class ContextSet {
 public:
  explicit ContextSet(const NGramLm& lm) : order_(lm.order()) {
    for (auto& c : lm_contexts(lm)) contexts_.insert(std::move(c));
  }

  bool contains(const NGram& h) const { return contexts_.contains(h); }

  // Longest suffix of `seq` (at most order - 1 tokens) that is a context.
  NGram next(const NGram& seq) const {
    NGram h = tail(seq, static_cast<size_t>(order_ - 1));
    while (!contexts_.contains(h)) h.erase(h.begin());
    return h;
  }

  // Longest proper suffix of a nonempty context that is a context.
  NGram backoff(const NGram& h) const { return next(NGram(h.begin() + 1, h.end())); }

  NGram start() const { return order_ > 1 && contexts_.contains({kSentenceBegin}) ? NGram{kSentenceBegin} : NGram{}; }

  const std::set<NGram>& all() const { return contexts_; }

 private:
  int order_;
  std::set<NGram> contexts_;
};

}  // namespace

double sentence_logprob_all_paths(const NGramLm& lm, std::span<const std::string> words) {
  const ContextSet contexts(lm);
  for (const auto& w : words) {
    if (w == kSentenceBegin || w == kSentenceEnd || !lm.find({w}))
      throw Error("symbol '" + w + "' is not in the LM vocabulary");
  }
  std::map<NGram, double> mass{{contexts.start(), 0.0}};
  auto absorb = [&](std::map<NGram, double>& into, const NGram& h, double w) {
    auto [it, inserted] = into.emplace(h, w);
    if (!inserted) it->second = log_add(it->second, w);
  };
  for (const auto& w : words) {
    std::map<NGram, double> next;
    for (const auto& [h, m] : mass) {
      NGram g = h;
      double acc = m;
      while (true) {
        NGram full = g;
        full.push_back(w);
        if (const NGramEntry* e = lm.find(full)) {
          absorb(next, contexts.next(full), acc + log10_to_ln(e->log10_prob));
        }
        if (g.empty()) break;
        acc += log10_to_ln(lm.find(g) ? lm.find(g)->log10_backoff : 0.0);
        g = contexts.backoff(g);
      }
    }
    mass = std::move(next);
  }
  double total = kLogZero;
  for (const auto& [h, m] : mass) {
    NGram g = h;
    double acc = m;
    while (true) {
      NGram full = g;
      full.push_back(kSentenceEnd);
      if (const NGramEntry* e = lm.find(full)) total = log_add(total, acc + log10_to_ln(e->log10_prob));
      if (g.empty()) break;
      acc += log10_to_ln(lm.find(g) ? lm.find(g)->log10_backoff : 0.0);
      g = contexts.backoff(g);
    }
  }
  return total;
}

double sentence_logprob_all_paths(const NGramLm& lm, std::span<const Label> labels,
                                  const SymbolTable& symbols) {
  return sentence_logprob_all_paths(lm, to_symbols(labels, symbols));
}

double context_mass(const NGramLm& lm, const NGram& history) {
  double mass = 0.0;
  for (const auto& w : lm.vocabulary()) mass += std::exp(lm.log_prob(history, w));
  return mass + std::exp(lm.log_prob(history, kSentenceEnd));
}

Wfst lm_to_fst(const NGramLm& lm, const SymbolTable& symbols) {
  const ContextSet contexts(lm);
  Wfst f;
  std::map<NGram, StateId> state_of;
  for (const auto& h : contexts.all()) state_of[h] = f.add_state();
  f.set_start(state_of.at(contexts.start()));

  for (int n = 1; n <= lm.order(); ++n) {
    for (const auto& [ngram, entry] : lm.entries(n)) {
      const std::string& w = ngram.back();
      if (w == kSentenceBegin) continue;
      NGram h(ngram.begin(), ngram.end() - 1);
      auto src = state_of.find(h);
      if (src == state_of.end()) continue;  // history can never be reached
      const double weight = log10_to_ln(entry.log10_prob);
      if (w == kSentenceEnd) {
        f.set_final(src->second, weight);
        continue;
      }
      const Label id = symbols.id_of(w);
      f.add_arc(src->second, state_of.at(contexts.next(ngram)), id, id, weight);
    }
  }
  for (const auto& [h, s] : state_of) {
    if (h.empty()) continue;
    const NGramEntry* e = lm.find(h);
    f.add_arc(s, state_of.at(contexts.backoff(h)), kEpsilon, kEpsilon,
              log10_to_ln(e ? e->log10_backoff : 0.0));
  }
  return f;
}

DenominatorGraph build_denominator(const Wfst& topology, const NGramLm& lm, const SymbolTable& symbols) {
  std::set<std::string> lm_vocab;
  for (const auto& w : lm.vocabulary()) lm_vocab.insert(w);
  std::set<std::string> topo_vocab;
  for (Label l : topology.output_alphabet()) topo_vocab.insert(symbols.symbol_of(l));
  if (lm_vocab != topo_vocab) {
    std::string diff;
    for (const auto& s : lm_vocab)
      if (!topo_vocab.contains(s)) diff += " " + s + "(lm-only)";
    for (const auto& s : topo_vocab)
      if (!lm_vocab.contains(s)) diff += " " + s + "(topology-only)";
    throw Error("denominator: LM vocabulary differs from topology alphabet:" + diff);
  }
  const int emissions = static_cast<int>(topology.output_alphabet().size()) + 1;
  return make_denominator(trim(compose(topology, lm_to_fst(lm, symbols))), emissions);
}

DenominatorGraph make_denominator(Wfst graph, int num_emissions) {
  for (Label l : graph.input_alphabet()) {
    if (emission_column(l) >= num_emissions)
      throw Error("denominator input label " + std::to_string(l) + " outside S_pi");
  }
  if (graph.num_states() != trim(graph).num_states()) throw Error("denominator graph is not trim");
  epsilon_topological_order(graph);
  return DenominatorGraph{std::move(graph), num_emissions};
}

DenominatorGraph zero_weight_denominator(const Wfst& topology) {
  return make_denominator(topology, static_cast<int>(topology.output_alphabet().size()) + 1);
}

}  // namespace catdesk
