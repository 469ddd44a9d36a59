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

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "catdesk/am.h"

namespace catdesk {

namespace {

constexpr char kMagic[4] = {'C', 'D', 'A', 'M'};
constexpr uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian host");

void put_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }

uint32_t get_u32(std::istream& is, const std::string& path) {
  uint32_t v = 0;
  const auto offset = is.tellg();
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
    throw ParseError(path + ": truncated header at byte " + std::to_string(offset));
  return v;
}

}  // namespace

void write_checkpoint(const ModelParams& params, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  os.write(kMagic, sizeof kMagic);
  put_u32(os, kVersion);
  put_u32(os, static_cast<uint32_t>(params.shape.input_dim));
  put_u32(os, static_cast<uint32_t>(params.shape.hidden_dim));
  put_u32(os, static_cast<uint32_t>(params.shape.num_emissions));
  for (const Matrix* m : params.tensors()) {
    os.write(reinterpret_cast<const char*>(m->data()), static_cast<std::streamsize>(m->size() * sizeof(double)));
  }
  if (!os) throw Error("write failed: " + path);
}

ModelParams read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  char magic[4];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw ParseError(path + ": bad checkpoint magic at byte 0");
  const uint32_t version = get_u32(is, path);
  if (version != kVersion) throw ParseError(path + ": unsupported checkpoint version " + std::to_string(version));
  AmShape shape;
  shape.input_dim = static_cast<int>(get_u32(is, path));
  shape.hidden_dim = static_cast<int>(get_u32(is, path));
  shape.num_emissions = static_cast<int>(get_u32(is, path));
  ModelParams params = ModelParams::zeros(shape);
  for (Matrix* m : params.tensors()) {
    const auto offset = is.tellg();
    if (!is.read(reinterpret_cast<char*>(m->data()), static_cast<std::streamsize>(m->size() * sizeof(double))))
      throw ParseError(path + ": truncated tensor data at byte " + std::to_string(offset));
  }
  if (is.peek() != std::char_traits<char>::eof()) throw ParseError(path + ": trailing bytes after tensors");
  return params;
}

}  // namespace catdesk
