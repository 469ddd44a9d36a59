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

#include "catdesk/fst_io.h"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace catdesk {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

template <typename T>
T parse_number(const std::string& tok, size_t line_no) {
  T value{};
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": bad number '" + tok + "'");
  }
  return value;
}

void write_state(const Wfst& f, StateId s, std::ostream& os) {
  for (const Arc& arc : f.arcs(s)) {
    os << s << ' ' << arc.nextstate << ' ' << arc.ilabel << ' ' << arc.olabel << ' '
       << format_double(-arc.weight) << '\n';
  }
}

void write_final(const Wfst& f, StateId s, std::ostream& os) {
  if (f.is_final(s)) os << s << ' ' << format_double(-f.final_weight(s)) << '\n';
}

}  // namespace

void write_fst_text(const Wfst& f, std::ostream& os) {
  if (f.empty()) return;
  const StateId start = f.start();
  if (f.arcs(start).empty()) {
    if (!f.is_final(start)) return;  // accepts nothing
    write_final(f, start, os);
  } else {
    write_state(f, start, os);
    write_final(f, start, os);
  }
  for (StateId s = 0; s < f.num_states(); ++s) {
    if (s == start) continue;
    write_state(f, s, os);
    write_final(f, s, os);
  }
}

Wfst read_fst_text(std::istream& is) {
  struct Record {
    StateId src;
    std::optional<Arc> arc;
    double final_weight;
  };
  std::vector<Record> records;
  StateId max_state = -1;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    const StateId src = parse_number<StateId>(toks[0], line_no);
    if (src < 0) throw ParseError("line " + std::to_string(line_no) + ": negative state");
    max_state = std::max(max_state, src);
    if (toks.size() == 5) {
      Arc arc;
      arc.nextstate = parse_number<StateId>(toks[1], line_no);
      arc.ilabel = parse_number<Label>(toks[2], line_no);
      arc.olabel = parse_number<Label>(toks[3], line_no);
      arc.weight = -parse_number<double>(toks[4], line_no);
      if (arc.nextstate < 0 || arc.ilabel < 0 || arc.olabel < 0)
        throw ParseError("line " + std::to_string(line_no) + ": negative id");
      max_state = std::max(max_state, arc.nextstate);
      records.push_back({src, arc, 0.0});
    } else if (toks.size() == 1 || toks.size() == 2) {
      double w = toks.size() == 2 ? -parse_number<double>(toks[1], line_no) : 0.0;
      records.push_back({src, std::nullopt, w});
    } else {
      throw ParseError("line " + std::to_string(line_no) + ": expected 1, 2 or 5 fields, got " +
                       std::to_string(toks.size()));
    }
  }
  Wfst f;
  if (records.empty()) return f;
  f.add_states(max_state + 1);
  f.set_start(records.front().src);
  for (const Record& r : records) {
    if (r.arc) {
      f.add_arc(r.src, *r.arc);
    } else {
      f.set_final(r.src, r.final_weight);
    }
  }
  return f;
}

void write_fst_file(const Wfst& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_fst_text(f, os);
  if (!os) throw Error("write failed: " + path);
}

Wfst read_fst_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  try {
    return read_fst_text(is);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void SymbolTable::add(std::string_view symbol, int id) {
  if (symbol.empty()) throw Error("empty symbol");
  auto s = by_symbol_.find(symbol);
  if (s != by_symbol_.end() && s->second != id)
    throw Error("symbol '" + std::string(symbol) + "' already mapped to " + std::to_string(s->second));
  auto i = by_id_.find(id);
  if (i != by_id_.end() && i->second != symbol)
    throw Error("id " + std::to_string(id) + " already mapped to '" + i->second + "'");
  by_symbol_.emplace(std::string(symbol), id);
  by_id_.emplace(id, std::string(symbol));
}

std::optional<int> SymbolTable::find(std::string_view symbol) const {
  auto it = by_symbol_.find(symbol);
  if (it == by_symbol_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> SymbolTable::find(int id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

int SymbolTable::id_of(std::string_view symbol) const {
  auto id = find(symbol);
  if (!id) throw Error("unknown symbol '" + std::string(symbol) + "'");
  return *id;
}

const std::string& SymbolTable::symbol_of(int id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw Error("unknown symbol id " + std::to_string(id));
  return it->second;
}

void SymbolTable::write(std::ostream& os) const {
  for (const auto& [id, sym] : by_id_) os << sym << ' ' << id << '\n';
}

SymbolTable SymbolTable::read(std::istream& is) {
  SymbolTable table;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 2) {
      throw ParseError("symbol table line " + std::to_string(line_no) + ": expected 'symbol id'");
    }
    try {
      table.add(toks[0], parse_number<int>(toks[1], line_no));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError("symbol table line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

void SymbolTable::write_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  write(os);
}

SymbolTable SymbolTable::read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  return read(is);
}

SymbolTable make_label_symbols(const std::vector<std::string>& names) {
  SymbolTable table;
  table.add("<eps>", kEpsilon);
  table.add("<blk>", kBlank);
  for (size_t i = 0; i < names.size(); ++i) table.add(names[i], kFirstSymbol + static_cast<int>(i));
  return table;
}

std::vector<std::string> default_label_names(int alphabet_size) {
  std::vector<std::string> names;
  for (int k = 0; k < alphabet_size; ++k) {
    names.push_back(alphabet_size <= 26 ? std::string(1, static_cast<char>('a' + k))
                                        : "p" + std::to_string(k));
  }
  return names;
}

}  // namespace catdesk
