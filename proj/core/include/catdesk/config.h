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

#ifndef CATDESK_CONFIG_H_
#define CATDESK_CONFIG_H_

#include <map>
#include <string>
#include <vector>

namespace catdesk {

// Plain-text `key = value` run configuration. Only known keys are accepted;
// every key has a default. Later sources override earlier ones:
// defaults, config file, CATDESK_* environment variables, command-line flags.
class RunConfig {
 public:
  RunConfig();

  static const std::vector<std::pair<std::string, std::string>>& defaults();
  static bool is_known(const std::string& key);

  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);
  void load_text(const std::string& text, const std::string& origin = "<text>");
  // CATDESK_<KEY> with the key upper-cased, e.g. CATDESK_CHUNK_SIZE.
  void apply_environment();

  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  uint64_t get_u64(const std::string& key) const;
  bool is_set(const std::string& key) const { return !get(key).empty(); }

  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

std::string env_name_for(const std::string& key);

}  // namespace catdesk

#endif  // CATDESK_CONFIG_H_
