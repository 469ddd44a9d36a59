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

#ifndef CATDESK_FST_IO_H_
#define CATDESK_FST_IO_H_

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "catdesk/fst.h"

namespace catdesk {

// Text FST format, one record per line:
//   src dst ilabel olabel cost   arc
//   state [cost]                 final state
// The first line's source state is the start state. Costs are negated log
// weights.
void write_fst_text(const Wfst& f, std::ostream& os);
Wfst read_fst_text(std::istream& is);
void write_fst_file(const Wfst& f, const std::string& path);
Wfst read_fst_file(const std::string& path);

// Bidirectional symbol <-> id map; `symbol id` lines on disk.
class SymbolTable {
 public:
  void add(std::string_view symbol, int id);
  std::optional<int> find(std::string_view symbol) const;
  std::optional<std::string> find(int id) const;
  int id_of(std::string_view symbol) const;          // throws on unknown
  const std::string& symbol_of(int id) const;        // throws on unknown
  bool contains(std::string_view symbol) const { return find(symbol).has_value(); }
  size_t size() const { return by_id_.size(); }
  const std::map<int, std::string>& by_id() const { return by_id_; }

  void write(std::ostream& os) const;
  static SymbolTable read(std::istream& is);
  void write_file(const std::string& path) const;
  static SymbolTable read_file(const std::string& path);

 private:
  std::map<std::string, int, std::less<>> by_symbol_;
  std::map<int, std::string> by_id_;
};

// Label symbols for an alphabet of K labels: <eps> 0, <blk> 1, then the
// given names at ids 2..K+1.
SymbolTable make_label_symbols(const std::vector<std::string>& names);

// Default synthetic label names: a, b, c, ... (K <= 26), else p0, p1, ...
std::vector<std::string> default_label_names(int alphabet_size);

// Shortest round-trip decimal text for a double.
std::string format_double(double v);

}  // namespace catdesk

#endif  // CATDESK_FST_IO_H_
