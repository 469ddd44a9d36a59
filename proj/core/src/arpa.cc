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

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "catdesk/lm.h"

namespace catdesk {

void write_arpa(const NGramLm& lm, std::ostream& os) {
  os << "\\data\\\n";
  for (int n = 1; n <= lm.order(); ++n) os << "ngram " << n << '=' << lm.entries(n).size() << '\n';
  for (int n = 1; n <= lm.order(); ++n) {
    os << "\n\\" << n << "-grams:\n";
    for (const auto& [ngram, entry] : lm.entries(n)) {
      os << format_double(entry.log10_prob) << '\t';
      for (size_t i = 0; i < ngram.size(); ++i) os << (i ? " " : "") << ngram[i];
      if (n < lm.order()) os << '\t' << format_double(entry.log10_backoff);
      os << '\n';
    }
  }
  os << "\n\\end\\\n";
}

namespace {

class ArpaReader {
 public:
  explicit ArpaReader(std::istream& is) : is_(is) {}

  NGramLm read() {
    std::string line = next_nonempty();
    if (line != "\\data\\") fail("expected \\data\\ header");
    std::vector<size_t> counts;
    while (true) {
      line = next_nonempty();
      if (line.rfind("ngram ", 0) != 0) break;
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail("malformed ngram count line");
      const int n = to_int(trim(line.substr(6, eq - 6)));
      const int count = to_int(trim(line.substr(eq + 1)));
      if (n != static_cast<int>(counts.size()) + 1 || count < 0) fail("ngram counts out of order");
      counts.push_back(static_cast<size_t>(count));
    }
    if (counts.empty()) fail("no ngram counts");

    NGramLm lm(static_cast<int>(counts.size()));
    for (size_t n = 1; n <= counts.size(); ++n) {
      if (line != "\\" + std::to_string(n) + "-grams:") {
        fail("expected \\" + std::to_string(n) + "-grams: section");
      }
      size_t seen = 0;
      while (true) {
        if (!std::getline(is_, line)) fail("unexpected end of file");
        ++line_no_;
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '\\') break;
        std::istringstream fields(line);
        std::vector<std::string> toks;
        std::string tok;
        while (fields >> tok) toks.push_back(tok);
        if (toks.size() != n + 1 && toks.size() != n + 2) {
          fail("expected " + std::to_string(n + 1) + " or " + std::to_string(n + 2) + " fields");
        }
        NGramEntry entry;
        entry.log10_prob = to_double(toks[0]);
        if (toks.size() == n + 2) entry.log10_backoff = to_double(toks[n + 1]);
        NGram ngram(toks.begin() + 1, toks.begin() + 1 + static_cast<std::ptrdiff_t>(n));
        if (lm.find(ngram)) fail("duplicate n-gram");
        lm.set(ngram, entry);
        ++seen;
      }
      if (seen != counts[n - 1]) {
        fail("section \\" + std::to_string(n) + "-grams: has " + std::to_string(seen) +
             " entries but header declares " + std::to_string(counts[n - 1]));
      }
    }
    if (line != "\\end\\") fail("expected \\end\\");
    try {
      lm.validate();
    } catch (const Error& e) {
      fail(e.what());
    }
    return lm;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("ARPA line " + std::to_string(line_no_) + ": " + what);
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::string next_nonempty() {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_no_;
      line = trim(line);
      if (!line.empty()) return line;
    }
    fail("unexpected end of file");
  }

  int to_int(const std::string& s) const {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) fail("bad integer '" + s + "'");
    return v;
  }

  double to_double(const std::string& s) const {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) fail("bad number '" + s + "'");
    return v;
  }

  std::istream& is_;
  size_t line_no_ = 0;
};

}  // namespace

NGramLm read_arpa(std::istream& is) { return ArpaReader(is).read(); }

void write_arpa_file(const NGramLm& lm, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_arpa(lm, os);
}

NGramLm read_arpa_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  try {
    return read_arpa(is);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace catdesk
