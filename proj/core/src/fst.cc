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

#include "catdesk/fst.h"

#include <algorithm>
#include <map>
#include <memory>
#include <sstream>
#include <tuple>

namespace catdesk {

StateId Wfst::add_state() {
  arcs_.emplace_back();
  finals_.push_back(kLogZero);
  return static_cast<StateId>(arcs_.size() - 1);
}

void Wfst::add_states(int n) {
  for (int i = 0; i < n; ++i) add_state();
}

void Wfst::set_start(StateId s) { start_ = static_cast<StateId>(check(s)); }

void Wfst::set_final(StateId s, double weight) {
  if (std::isnan(weight) || weight == std::numeric_limits<double>::infinity())
    throw Error("final weight must be finite or log-zero");
  finals_[check(s)] = weight;
}

void Wfst::add_arc(StateId src, const Arc& arc) {
  check(arc.nextstate);
  if (arc.ilabel < 0 || arc.olabel < 0) throw Error("negative label on arc");
  if (std::isnan(arc.weight) || arc.weight == std::numeric_limits<double>::infinity())
    throw Error("arc weight must be finite or log-zero");
  arcs_[check(src)].push_back(arc);
}

size_t Wfst::num_arcs() const {
  size_t n = 0;
  for (const auto& a : arcs_) n += a.size();
  return n;
}

std::set<Label> Wfst::input_alphabet() const {
  std::set<Label> out;
  for (const auto& state : arcs_)
    for (const Arc& arc : state)
      if (arc.ilabel != kEpsilon) out.insert(arc.ilabel);
  return out;
}

std::set<Label> Wfst::output_alphabet() const {
  std::set<Label> out;
  for (const auto& state : arcs_)
    for (const Arc& arc : state)
      if (arc.olabel != kEpsilon) out.insert(arc.olabel);
  return out;
}

size_t Wfst::check(StateId s) const {
  if (s < 0 || static_cast<size_t>(s) >= arcs_.size()) {
    throw Error("state " + std::to_string(s) + " out of range (" +
                std::to_string(arcs_.size()) + " states)");
  }
  return static_cast<size_t>(s);
}

namespace {

std::string join_labels(const std::vector<Label>& labels) {
  std::ostringstream os;
  for (size_t i = 0; i < labels.size(); ++i) os << (i ? " " : "") << labels[i];
  return os.str();
}

}  // namespace

Wfst compose(const Wfst& a, const Wfst& b, ComposeOptions options) {
  if (options.check_alphabets) {
    const auto a_out = a.output_alphabet();
    const auto b_in = b.input_alphabet();
    std::vector<Label> missing;
    std::set_difference(a_out.begin(), a_out.end(), b_in.begin(), b_in.end(),
                        std::back_inserter(missing));
    if (!missing.empty()) {
      throw Error("compose: output labels of the left machine missing from the right "
                  "machine's input alphabet: " + join_labels(missing));
    }
  }

  Wfst out;
  if (a.empty() || b.empty()) return out;

  // Filter state 0: free; 1: after a left-only epsilon move; 2: after a
  // right-only epsilon move. Left-only and right-only moves cannot follow each
  // other, and simultaneous epsilon moves are only taken from 0, so every
  // pairing of epsilon paths is produced exactly once.
  using Key = std::tuple<StateId, StateId, int>;
  std::map<Key, StateId> index;
  std::vector<Key> queue;
  auto lookup = [&](StateId sa, StateId sb, int filter) {
    Key key{sa, sb, filter};
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    StateId s = out.add_state();
    index.emplace(key, s);
    queue.push_back(key);
    return s;
  };

  out.set_start(lookup(a.start(), b.start(), 0));
  for (size_t head = 0; head < queue.size(); ++head) {
    const auto [sa, sb, filter] = queue[head];
    const StateId src = index.at(queue[head]);
    if (a.is_final(sa) && b.is_final(sb)) out.set_final(src, a.final_weight(sa) + b.final_weight(sb));

    for (const Arc& arc_a : a.arcs(sa)) {
      if (arc_a.olabel == kEpsilon) {
        if (filter != 2) {
          out.add_arc(src, lookup(arc_a.nextstate, sb, 1), arc_a.ilabel, kEpsilon, arc_a.weight);
        }
        if (filter == 0) {
          for (const Arc& arc_b : b.arcs(sb)) {
            if (arc_b.ilabel != kEpsilon) continue;
            out.add_arc(src, lookup(arc_a.nextstate, arc_b.nextstate, 0), arc_a.ilabel,
                        arc_b.olabel, arc_a.weight + arc_b.weight);
          }
        }
        continue;
      }
      for (const Arc& arc_b : b.arcs(sb)) {
        if (arc_b.ilabel != arc_a.olabel) continue;
        out.add_arc(src, lookup(arc_a.nextstate, arc_b.nextstate, 0), arc_a.ilabel, arc_b.olabel,
                    arc_a.weight + arc_b.weight);
      }
    }
    if (filter != 1) {
      for (const Arc& arc_b : b.arcs(sb)) {
        if (arc_b.ilabel != kEpsilon) continue;
        out.add_arc(src, lookup(sa, arc_b.nextstate, 2), kEpsilon, arc_b.olabel, arc_b.weight);
      }
    }
  }
  return out;
}

Wfst trim(const Wfst& f) {
  Wfst out;
  if (f.empty()) return out;
  const int n = f.num_states();

  std::vector<char> accessible(n, 0);
  std::vector<StateId> stack{f.start()};
  accessible[f.start()] = 1;
  std::vector<std::vector<StateId>> reverse(n);
  while (!stack.empty()) {
    StateId s = stack.back();
    stack.pop_back();
    for (const Arc& arc : f.arcs(s)) {
      if (arc.weight == kLogZero) continue;
      if (!accessible[arc.nextstate]) {
        accessible[arc.nextstate] = 1;
        stack.push_back(arc.nextstate);
      }
    }
  }
  for (StateId s = 0; s < n; ++s)
    for (const Arc& arc : f.arcs(s))
      if (arc.weight != kLogZero) reverse[arc.nextstate].push_back(s);

  std::vector<char> coaccessible(n, 0);
  for (StateId s = 0; s < n; ++s) {
    if (f.is_final(s)) {
      coaccessible[s] = 1;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    StateId s = stack.back();
    stack.pop_back();
    for (StateId p : reverse[s]) {
      if (!coaccessible[p]) {
        coaccessible[p] = 1;
        stack.push_back(p);
      }
    }
  }

  if (!accessible[f.start()] || !coaccessible[f.start()]) return out;
  std::vector<StateId> remap(n, kNoState);
  for (StateId s = 0; s < n; ++s)
    if (accessible[s] && coaccessible[s]) remap[s] = out.add_state();
  out.set_start(remap[f.start()]);
  for (StateId s = 0; s < n; ++s) {
    if (remap[s] == kNoState) continue;
    if (f.is_final(s)) out.set_final(remap[s], f.final_weight(s));
    for (const Arc& arc : f.arcs(s)) {
      if (arc.weight == kLogZero || remap[arc.nextstate] == kNoState) continue;
      out.add_arc(remap[s], remap[arc.nextstate], arc.ilabel, arc.olabel, arc.weight);
    }
  }
  return out;
}

Wfst linear_acceptor(std::span<const Label> labels) {
  Wfst f;
  f.add_states(static_cast<int>(labels.size()) + 1);
  f.set_start(0);
  for (size_t i = 0; i < labels.size(); ++i) {
    f.add_arc(static_cast<StateId>(i), static_cast<StateId>(i + 1), labels[i], labels[i], 0.0);
  }
  f.set_final(static_cast<StateId>(labels.size()), 0.0);
  return f;
}

std::vector<StateId> epsilon_topological_order(const Wfst& f) {
  const int n = f.num_states();
  std::vector<int> indegree(n, 0);
  for (StateId s = 0; s < n; ++s)
    for (const Arc& arc : f.arcs(s))
      if (arc.ilabel == kEpsilon) ++indegree[arc.nextstate];
  std::vector<StateId> order;
  order.reserve(n);
  for (StateId s = 0; s < n; ++s)
    if (indegree[s] == 0) order.push_back(s);
  for (size_t head = 0; head < order.size(); ++head) {
    for (const Arc& arc : f.arcs(order[head])) {
      if (arc.ilabel != kEpsilon) continue;
      if (--indegree[arc.nextstate] == 0) order.push_back(arc.nextstate);
    }
  }
  if (static_cast<int>(order.size()) != n) throw Error("graph has an epsilon-input cycle");
  return order;
}

namespace {

constexpr size_t kMaxEnumeratedPaths = 2'000'000;

// Depth-first walk over all paths whose input length stays <= max_len.
template <typename Visit>
void walk_paths(const Wfst& f, int max_len, Visit&& visit) {
  if (max_len < 0 || max_len > kMaxEnumerationLength) {
    throw OverflowError("enumeration length " + std::to_string(max_len) + " outside [0, " +
                        std::to_string(kMaxEnumerationLength) + "]");
  }
  if (f.empty()) return;
  size_t paths = 0;
  LabelSeq input, output;
  // Epsilon-input runs longer than the state count imply an epsilon cycle.
  auto rec = [&](auto&& self, StateId s, double weight, int eps_run) -> void {
    if (eps_run > f.num_states()) throw OverflowError("epsilon-input cycle during enumeration");
    if (f.is_final(s)) {
      if (++paths > kMaxEnumeratedPaths) throw OverflowError("enumeration exceeded path limit");
      visit(input, output, weight + f.final_weight(s));
    }
    for (const Arc& arc : f.arcs(s)) {
      if (arc.weight == kLogZero) continue;
      const bool consumes = arc.ilabel != kEpsilon;
      if (consumes && static_cast<int>(input.size()) >= max_len) continue;
      if (consumes) input.push_back(arc.ilabel);
      if (arc.olabel != kEpsilon) output.push_back(arc.olabel);
      self(self, arc.nextstate, weight + arc.weight, consumes ? 0 : eps_run + 1);
      if (consumes) input.pop_back();
      if (arc.olabel != kEpsilon) output.pop_back();
    }
  };
  rec(rec, f.start(), 0.0, 0);
}

}  // namespace

std::vector<WeightedSequence> enumerate_language(const Wfst& f, int max_len) {
  std::map<LabelSeq, double> sums;
  walk_paths(f, max_len, [&](const LabelSeq& in, const LabelSeq&, double w) {
    auto [it, inserted] = sums.emplace(in, w);
    if (!inserted) it->second = log_add(it->second, w);
  });
  std::vector<WeightedSequence> out;
  out.reserve(sums.size());
  for (auto& [seq, w] : sums) out.push_back({seq, w});
  return out;
}

std::vector<WeightedPair> enumerate_relation(const Wfst& f, int max_len) {
  std::map<std::pair<LabelSeq, LabelSeq>, double> sums;
  walk_paths(f, max_len, [&](const LabelSeq& in, const LabelSeq& outp, double w) {
    auto [it, inserted] = sums.emplace(std::make_pair(in, outp), w);
    if (!inserted) it->second = log_add(it->second, w);
  });
  std::vector<WeightedPair> out;
  out.reserve(sums.size());
  for (auto& [key, w] : sums) out.push_back({key.first, key.second, w});
  return out;
}

namespace {

// Persistent singly linked label history; tokens share prefixes.
struct History {
  Label label;
  std::shared_ptr<const History> prev;
};
using HistoryPtr = std::shared_ptr<const History>;

HistoryPtr extend(const HistoryPtr& h, Label label) {
  if (label == kEpsilon) return h;
  return std::make_shared<const History>(History{label, h});
}

LabelSeq materialize(const HistoryPtr& h) {
  LabelSeq out;
  for (const History* p = h.get(); p; p = p->prev.get()) out.push_back(p->label);
  std::reverse(out.begin(), out.end());
  return out;
}

struct Token {
  double score = kLogZero;
  HistoryPtr input;
  HistoryPtr output;
};

// True when candidate beats incumbent: higher score, then smaller output.
bool better(const Token& candidate, const Token& incumbent) {
  if (incumbent.score == kLogZero) return candidate.score != kLogZero;
  if (candidate.score != incumbent.score) return candidate.score > incumbent.score;
  if (candidate.output == incumbent.output) return false;
  return materialize(candidate.output) < materialize(incumbent.output);
}

PathWeight finish(const Wfst& f, const std::vector<Token>& tokens) {
  Token best;
  for (StateId s = 0; s < f.num_states(); ++s) {
    if (tokens[s].score == kLogZero || !f.is_final(s)) continue;
    Token t = tokens[s];
    t.score += f.final_weight(s);
    if (better(t, best)) best = t;
  }
  if (best.score == kLogZero) throw NoPathError("no accepting path");
  return PathWeight{best.score, materialize(best.input), materialize(best.output)};
}

void epsilon_closure(const Wfst& f, std::span<const StateId> order, std::vector<Token>& tokens) {
  for (StateId s : order) {
    if (tokens[s].score == kLogZero) continue;
    for (const Arc& arc : f.arcs(s)) {
      if (arc.ilabel != kEpsilon || arc.weight == kLogZero) continue;
      Token t{tokens[s].score + arc.weight, tokens[s].input, extend(tokens[s].output, arc.olabel)};
      if (better(t, tokens[arc.nextstate])) tokens[arc.nextstate] = std::move(t);
    }
  }
}

void prune(std::vector<Token>& tokens, const ViterbiOptions& options) {
  double best = kLogZero;
  std::vector<StateId> active;
  for (StateId s = 0; s < static_cast<StateId>(tokens.size()); ++s) {
    if (tokens[s].score == kLogZero) continue;
    best = std::max(best, tokens[s].score);
    active.push_back(s);
  }
  if (active.empty()) return;
  if (std::isfinite(options.beam)) {
    for (StateId s : active)
      if (tokens[s].score < best - options.beam) tokens[s] = Token{};
  }
  if (static_cast<long>(active.size()) > options.max_active) {
    std::vector<StateId> alive;
    for (StateId s : active)
      if (tokens[s].score != kLogZero) alive.push_back(s);
    if (static_cast<long>(alive.size()) <= options.max_active) return;
    std::stable_sort(alive.begin(), alive.end(), [&](StateId x, StateId y) {
      return tokens[x].score > tokens[y].score;
    });
    for (size_t i = static_cast<size_t>(options.max_active); i < alive.size(); ++i)
      tokens[alive[i]] = Token{};
  }
}

}  // namespace

PathWeight viterbi(const Wfst& f, const FrameLogits& emissions, const ViterbiOptions& options) {
  if (f.empty()) throw NoPathError("empty graph");
  if (!(options.beam > 0.0)) throw Error("beam must be positive");
  if (options.max_active < 1) throw Error("max_active must be at least 1");
  for (Label l : f.input_alphabet()) {
    if (emission_column(l) >= emissions.cols()) {
      throw Error("input label " + std::to_string(l) + " has no emission column (" +
                  std::to_string(emissions.cols()) + " columns)");
    }
  }
  const auto order = epsilon_topological_order(f);
  const int n = f.num_states();
  std::vector<Token> current(n), next(n);
  current[f.start()] = Token{0.0, nullptr, nullptr};
  epsilon_closure(f, order, current);
  prune(current, options);

  for (Eigen::Index t = 0; t < emissions.rows(); ++t) {
    std::fill(next.begin(), next.end(), Token{});
    bool any = false;
    for (StateId s = 0; s < n; ++s) {
      const Token& tok = current[s];
      if (tok.score == kLogZero) continue;
      for (const Arc& arc : f.arcs(s)) {
        if (arc.ilabel == kEpsilon || arc.weight == kLogZero) continue;
        Token cand{tok.score + arc.weight + emissions(t, emission_column(arc.ilabel)),
                   extend(tok.input, arc.ilabel), extend(tok.output, arc.olabel)};
        if (better(cand, next[arc.nextstate])) {
          next[arc.nextstate] = std::move(cand);
          any = true;
        }
      }
    }
    if (!any) throw NoPathError("all paths pruned or blocked at frame " + std::to_string(t));
    epsilon_closure(f, order, next);
    prune(next, options);
    std::swap(current, next);
  }
  return finish(f, current);
}

PathWeight shortest_path(const Wfst& f, const FrameLogits& emissions) {
  return viterbi(f, emissions, ViterbiOptions{});
}

PathWeight shortest_path(const Wfst& f) {
  if (f.empty()) throw NoPathError("empty graph");
  const int n = f.num_states();
  std::vector<Token> tokens(n);
  tokens[f.start()] = Token{0.0, nullptr, nullptr};
  // Bellman-Ford in the tropical (max) semiring; a strict improvement after
  // n rounds means a positive-weight cycle.
  for (int round = 0; round <= n; ++round) {
    bool improved = false;
    for (StateId s = 0; s < n; ++s) {
      if (tokens[s].score == kLogZero) continue;
      for (const Arc& arc : f.arcs(s)) {
        if (arc.weight == kLogZero) continue;
        Token cand{tokens[s].score + arc.weight, extend(tokens[s].input, arc.ilabel),
                   extend(tokens[s].output, arc.olabel)};
        Token& dst = tokens[arc.nextstate];
        if (cand.score > dst.score) improved = true;
        if (better(cand, dst)) dst = std::move(cand);
      }
    }
    if (!improved) break;
    if (round == n) throw Error("shortest_path: positive-weight cycle");
  }
  return finish(f, tokens);
}

}  // namespace catdesk
