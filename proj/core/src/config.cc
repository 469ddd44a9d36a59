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

#include "catdesk/config.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "catdesk/types.h"

namespace catdesk {

const std::vector<std::pair<std::string, std::string>>& RunConfig::defaults() {
  static const std::vector<std::pair<std::string, std::string>> kDefaults = {
      {"seed", "1"},
      {"alphabet", "3"},
      {"d_in", "2"},
      {"d_h", "16"},
      {"lm_order", "2"},
      {"alpha", "0.01"},
      {"lambda", "0.005"},
      {"chunk_size", "40"},
      {"left_context", "10"},
      {"right_context", "10"},
      {"jitter_fraction", "0.25"},
      {"lr", "0.001"},
      {"clip_norm", "5.0"},
      {"epochs", "30"},
      {"batch_size", "1"},
      {"workers", "1"},
      {"beam", "16.0"},
      {"max_active", "2000"},
      {"acoustic_scale", "1.0"},
      {"decoder", "greedy"},
      {"frame_shift_ms", "10"},
      {"sampling_factor", "3"},
      {"sigma", "0.3"},
      {"num_utts", "250"},
      {"min_duration", "2"},
      {"max_duration", "6"},
      {"min_labels", "3"},
      {"max_labels", "8"},
      {"successor_bias", "0.6"},
      {"mode", "whole"},
      {"loss", "crf"},
      {"corpus_dir", ""},
      {"out_dir", ""},
      {"lm_path", ""},
      {"den_path", ""},
      {"model_path", ""},
      {"teacher_path", ""},
      {"hyp_path", ""},
      {"ref_path", ""},
      {"log_path", ""},
      {"split", "test"},
  };
  return kDefaults;
}

bool RunConfig::is_known(const std::string& key) {
  const auto& d = defaults();
  return std::any_of(d.begin(), d.end(), [&](const auto& kv) { return kv.first == key; });
}

RunConfig::RunConfig() {
  for (const auto& [k, v] : defaults()) values_[k] = v;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!is_known(key)) throw Error("unknown config key '" + key + "'");
  values_[key] = value;
}

void RunConfig::load_text(const std::string& text, const std::string& origin) {
  std::istringstream is(text);
  std::string line;
  size_t line_no = 0;
  auto strip = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(origin + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = strip(line.substr(0, eq));
    if (!is_known(key)) throw ParseError(origin + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    values_[key] = strip(line.substr(eq + 1));
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  load_text(ss.str(), path);
}

std::string env_name_for(const std::string& key) {
  std::string out = "CATDESK_";
  for (char c : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

void RunConfig::apply_environment() {
  for (const auto& [key, value] : defaults()) {
    if (const char* v = std::getenv(env_name_for(key).c_str())) values_[key] = v;
  }
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error("unknown config key '" + key + "'");
  return it->second;
}

int RunConfig::get_int(const std::string& key) const {
  const std::string& s = get(key);
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw Error("config key '" + key + "' expects an integer, got '" + s + "'");
  return v;
}

uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string& s = get(key);
  uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw Error("config key '" + key + "' expects a non-negative integer, got '" + s + "'");
  return v;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& s = get(key);
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw Error("config key '" + key + "' expects a number, got '" + s + "'");
  return v;
}

std::string RunConfig::dump() const {
  std::ostringstream os;
  for (const auto& [key, def] : defaults()) os << key << " = " << values_.at(key) << '\n';
  return os.str();
}

}  // namespace catdesk
