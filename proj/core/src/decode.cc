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

#include "catdesk/decode.h"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "catdesk/loss.h"

namespace catdesk {

void Lexicon::add(const std::string& word, LabelSeq pronunciation) {
  if (word.empty()) throw Error("lexicon: empty word");
  if (pronunciation.empty()) throw Error("lexicon: word '" + word + "' has an empty pronunciation");
  for (Label l : pronunciation) {
    if (l < kFirstSymbol) throw Error("lexicon: word '" + word + "' uses a reserved label");
  }
  entries[word].push_back(std::move(pronunciation));
}

std::vector<std::string> Lexicon::words() const {
  std::vector<std::string> out;
  for (const auto& [w, prons] : entries) out.push_back(w);
  return out;
}

Lexicon read_lexicon(std::istream& is, const SymbolTable& labels) {
  Lexicon lex;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string word, sym;
    if (!(fields >> word)) continue;
    LabelSeq pron;
    while (fields >> sym) {
      auto id = labels.find(sym);
      if (!id || *id < kFirstSymbol) {
        throw ParseError("lexicon line " + std::to_string(line_no) + ": unknown label '" + sym + "'");
      }
      pron.push_back(*id);
    }
    if (pron.empty()) throw ParseError("lexicon line " + std::to_string(line_no) + ": no pronunciation");
    lex.add(word, std::move(pron));
  }
  return lex;
}

SymbolTable make_word_symbols(const std::vector<std::string>& words) {
  std::set<std::string> sorted(words.begin(), words.end());
  SymbolTable table;
  table.add("<eps>", kEpsilon);
  int id = 1;
  for (const auto& w : sorted) table.add(w, id++);
  return table;
}

Wfst lexicon_to_fst(const Lexicon& lexicon, const SymbolTable& words) {
  Wfst f;
  const StateId loop = f.add_state();
  f.set_start(loop);
  f.set_final(loop);
  for (const auto& [word, prons] : lexicon.entries) {
    const int word_id = words.id_of(word);
    for (const LabelSeq& pron : prons) {
      StateId prev = loop;
      for (size_t i = 0; i < pron.size(); ++i) {
        const StateId next = f.add_state();
        f.add_arc(prev, next, pron[i], i == 0 ? word_id : kEpsilon);
        prev = next;
      }
      f.add_arc(prev, loop, kEpsilon, kEpsilon);
    }
  }
  return f;
}

Wfst build_decode_graph(const Wfst& topology, const Lexicon& lexicon, const NGramLm& word_lm,
                        const SymbolTable& words) {
  const auto topo_out = topology.output_alphabet();
  std::string bad;
  for (const auto& [word, prons] : lexicon.entries) {
    for (const LabelSeq& pron : prons)
      for (Label l : pron)
        if (!topo_out.contains(l)) bad += " " + word + ":" + std::to_string(l);
  }
  if (!bad.empty()) throw Error("decode graph: lexicon labels outside the topology alphabet:" + bad);
  const auto vocab = word_lm.vocabulary();
  const std::set<std::string> lm_words(vocab.begin(), vocab.end());
  for (const auto& w : lexicon.words())
    if (!lm_words.contains(w)) bad += " " + w;
  if (!bad.empty()) throw Error("decode graph: lexicon words missing from the word LM:" + bad);

  Wfst lg = compose(topology, lexicon_to_fst(lexicon, words), ComposeOptions{.check_alphabets = false});
  return trim(compose(lg, lm_to_fst(word_lm, words), ComposeOptions{.check_alphabets = false}));
}

Hypothesis beam_decode(const Wfst& graph, const FrameLogits& logits, const DecodeOptions& options) {
  FrameLogits scores = log_softmax_rows(logits);
  if (options.acoustic_scale != 1.0) scores *= options.acoustic_scale;
  PathWeight best;
  try {
    best = viterbi(graph, scores, ViterbiOptions{options.beam, options.max_active});
  } catch (const NoPathError& e) {
    throw NoPathError(std::string("beam search found no complete path (") + e.what() +
                      "); try a larger beam or max_active");
  }
  return Hypothesis{best.output, best.total, best.input};
}

LabelSeq greedy_decode(const FrameLogits& logits) {
  Alignment best(static_cast<size_t>(logits.rows()));
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    Eigen::Index arg = 0;
    for (Eigen::Index k = 1; k < logits.cols(); ++k)
      if (logits(t, k) > logits(t, arg)) arg = k;
    best[t] = column_label(static_cast<int>(arg));
  }
  LabelSeq out;
  Label prev = kEpsilon;
  for (Label l : best) {
    if (l != prev && l != kBlank) out.push_back(l);
    prev = l;
  }
  return out;
}

void write_hypothesis_line(std::ostream& os, const TranscriptLine& line) {
  os << line.id << '\t' << format_double(line.score) << '\t';
  for (size_t i = 0; i < line.tokens.size(); ++i) os << (i ? " " : "") << line.tokens[i];
  os << '\n';
}

std::vector<TranscriptLine> read_transcript_lines(std::istream& is) {
  std::vector<TranscriptLine> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    TranscriptLine t;
    std::string tokens;
    const auto tab1 = line.find('\t');
    if (tab1 != std::string::npos) {
      const auto tab2 = line.find('\t', tab1 + 1);
      if (tab2 == std::string::npos) throw ParseError("line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
      t.id = line.substr(0, tab1);
      const std::string score = line.substr(tab1 + 1, tab2 - tab1 - 1);
      try {
        t.score = std::stod(score);
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad score '" + score + "'");
      }
      tokens = line.substr(tab2 + 1);
    } else {
      std::istringstream fields(line);
      fields >> t.id;
      std::getline(fields, tokens);
    }
    std::istringstream toks(tokens);
    std::string tok;
    while (toks >> tok) t.tokens.push_back(tok);
    out.push_back(std::move(t));
  }
  return out;
}

ScoreReport score_transcripts(const std::vector<TranscriptLine>& refs, const std::vector<TranscriptLine>& hyps) {
  std::unordered_map<std::string, const TranscriptLine*> by_id;
  for (const auto& h : hyps) by_id[h.id] = &h;
  ScoreReport report;
  static const std::vector<std::string> kEmpty;
  for (const auto& r : refs) {
    auto it = by_id.find(r.id);
    const std::vector<std::string>& hyp = it == by_id.end() ? kEmpty : it->second->tokens;
    if (it == by_id.end()) ++report.missing;
    report.stats += edit_distance(r.tokens, hyp);
    ++report.utterances;
  }
  return report;
}

std::string format_score(const ScoreReport& report) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "PER %.3f S %d I %d D %d", 100.0 * report.stats.error_rate(),
                report.stats.substitutions, report.stats.insertions, report.stats.deletions);
  return buf;
}

}  // namespace catdesk
