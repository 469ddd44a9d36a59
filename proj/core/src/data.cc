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

#include "catdesk/data.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace catdesk {

namespace fs = std::filesystem;

void SynthSpec::validate() const {
  if (alphabet_size < 1) throw Error("synth: alphabet_size must be >= 1");
  if (input_dim < 2) throw Error("synth: input_dim must be >= 2");
  if (!(noise_std > 0.0)) throw Error("synth: noise_std must be > 0");
  if (min_duration < 1 || max_duration < min_duration) throw Error("synth: bad duration range");
  if (min_labels < 1 || max_labels < min_labels) throw Error("synth: bad label-count range");
  if (num_utterances < 1) throw Error("synth: num_utterances must be >= 1");
  if (!(successor_bias >= 0.0 && successor_bias < 1.0)) throw Error("synth: successor_bias must be in [0, 1)");
  if (alphabet_size == 1 && max_labels > 1) {
    throw Error("synth: a one-label alphabet cannot produce non-repeating sequences longer than 1");
  }
  if (means.size() != 0) {
    if (means.rows() != alphabet_size || means.cols() != input_dim) throw Error("synth: means shape mismatch");
    for (int i = 0; i < alphabet_size; ++i)
      for (int j = i + 1; j < alphabet_size; ++j)
        if ((means.row(i) - means.row(j)).norm() == 0.0) throw Error("synth: means must be distinct");
  }
}

Matrix default_means(int alphabet_size, int input_dim) {
  Matrix means = Matrix::Zero(alphabet_size, input_dim);
  for (int k = 0; k < alphabet_size; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / alphabet_size;
    means(k, 0) = std::cos(angle);
    means(k, 1) = std::sin(angle);
    for (int d = 2; d < input_dim; ++d) means(k, d) = 0.5 * std::sin(1.7 * (k + 1) * (d + 1));
  }
  return means;
}

Corpus synth_corpus(const SynthSpec& spec) {
  spec.validate();
  const int k = spec.alphabet_size;
  Corpus corpus;
  corpus.means = spec.means.size() ? spec.means : default_means(k, spec.input_dim);

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> n_labels(spec.min_labels, spec.max_labels);
  std::uniform_int_distribution<int> duration(spec.min_duration, spec.max_duration);
  std::uniform_int_distribution<int> first(0, k - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, spec.noise_std);

  auto next_label = [&](int prev) {
    if (k == 1) return 0;
    const int successor = (prev + 1) % k;
    if (unit(rng) < spec.successor_bias) return successor;
    std::uniform_int_distribution<int> other(0, k - 2);
    int pick = other(rng);
    if (pick >= prev) ++pick;  // skip the repeat
    return pick;
  };

  std::vector<Utterance> all;
  for (int u = 0; u < spec.num_utterances; ++u) {
    Utterance utt;
    char id[32];
    std::snprintf(id, sizeof id, "utt%05d", u);
    utt.id = id;
    const int n = n_labels(rng);
    int prev = first(rng);
    std::vector<int> durations;
    for (int i = 0; i < n; ++i) {
      if (i > 0) prev = next_label(prev);
      utt.transcript.push_back(kFirstSymbol + prev);
      durations.push_back(duration(rng));
    }
    int frames = 0;
    for (int d : durations) frames += d;
    utt.features = Matrix::Zero(frames, spec.input_dim);
    int t = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < durations[i]; ++j, ++t) {
        utt.frame_labels.push_back(utt.transcript[i]);
        for (int d = 0; d < spec.input_dim; ++d) {
          utt.features(t, d) = corpus.means(utt.transcript[i] - kFirstSymbol, d) + noise(rng);
        }
      }
    }
    all.push_back(std::move(utt));
  }

  const int n_train = static_cast<int>(std::lround(0.8 * spec.num_utterances));
  const int n_dev = static_cast<int>(std::lround(0.1 * spec.num_utterances));
  for (int u = 0; u < spec.num_utterances; ++u) {
    auto& split = u < n_train ? corpus.train : (u < n_train + n_dev ? corpus.dev : corpus.test);
    split.push_back(std::move(all[u]));
  }
  return corpus;
}

namespace {

constexpr char kFeatsMagic[4] = {'C', 'D', 'F', 'T'};
constexpr uint32_t kFeatsVersion = 1;
static_assert(std::endian::native == std::endian::little, "corpus I/O assumes little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

class ByteReader {
 public:
  ByteReader(std::istream& is, std::string path) : is_(is), path_(std::move(path)) {}

  void read(void* dst, size_t n, const char* what) {
    if (!is_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n))) {
      throw ParseError(path_ + ": truncated " + what + " at byte " + std::to_string(offset_));
    }
    offset_ += n;
  }
  template <typename T>
  T get(const char* what) {
    T v{};
    read(&v, sizeof v, what);
    return v;
  }
  size_t offset() const { return offset_; }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(path_ + ": " + what + " at byte " + std::to_string(offset_));
  }

 private:
  std::istream& is_;
  std::string path_;
  size_t offset_ = 0;
};

}  // namespace

void write_corpus(const std::vector<Utterance>& utts, const std::string& dir, const SymbolTable& labels) {
  fs::create_directories(dir);
  const std::string feats_path = (fs::path(dir) / "feats.bin").string();
  std::ofstream feats(feats_path, std::ios::binary);
  if (!feats) throw Error("cannot open " + feats_path + " for writing");
  feats.write(kFeatsMagic, sizeof kFeatsMagic);
  put<uint32_t>(feats, kFeatsVersion);
  put<uint64_t>(feats, utts.size());
  for (const auto& u : utts) {
    put<uint32_t>(feats, static_cast<uint32_t>(u.id.size()));
    feats.write(u.id.data(), static_cast<std::streamsize>(u.id.size()));
    put<uint32_t>(feats, static_cast<uint32_t>(u.features.rows()));
    put<uint32_t>(feats, static_cast<uint32_t>(u.features.cols()));
    feats.write(reinterpret_cast<const char*>(u.features.data()),
                static_cast<std::streamsize>(u.features.size() * sizeof(double)));
  }
  if (!feats) throw Error("write failed: " + feats_path);

  const std::string text_path = (fs::path(dir) / "text").string();
  std::ofstream text(text_path);
  if (!text) throw Error("cannot open " + text_path + " for writing");
  for (const auto& u : utts) {
    text << u.id;
    for (Label l : u.transcript) text << ' ' << labels.symbol_of(l);
    text << '\n';
  }
}

std::vector<Utterance> read_corpus(const std::string& dir, const SymbolTable& labels) {
  const std::string feats_path = (fs::path(dir) / "feats.bin").string();
  std::ifstream feats(feats_path, std::ios::binary);
  if (!feats) throw Error("cannot open " + feats_path);
  std::vector<Utterance> utts;
  if (feats.peek() == std::char_traits<char>::eof()) return utts;

  ByteReader in(feats, feats_path);
  char magic[4];
  in.read(magic, sizeof magic, "magic");
  if (std::memcmp(magic, kFeatsMagic, sizeof magic) != 0) throw ParseError(feats_path + ": bad magic at byte 0");
  const auto version = in.get<uint32_t>("version");
  if (version != kFeatsVersion) in.fail("unsupported version " + std::to_string(version));
  const auto count = in.get<uint64_t>("utterance count");
  for (uint64_t i = 0; i < count; ++i) {
    Utterance u;
    const auto id_len = in.get<uint32_t>("id length");
    if (id_len == 0 || id_len > 4096) in.fail("implausible id length " + std::to_string(id_len));
    u.id.resize(id_len);
    in.read(u.id.data(), id_len, "utterance id");
    const auto frames = in.get<uint32_t>("frame count");
    const auto dim = in.get<uint32_t>("feature dim");
    if (dim == 0 || dim > 1u << 16) in.fail("implausible feature dim " + std::to_string(dim));
    u.features = Matrix::Zero(frames, dim);
    in.read(u.features.data(), static_cast<size_t>(frames) * dim * sizeof(double), "feature data");
    utts.push_back(std::move(u));
  }
  if (feats.peek() != std::char_traits<char>::eof()) in.fail("trailing bytes after last utterance");

  const std::string text_path = (fs::path(dir) / "text").string();
  std::ifstream text(text_path);
  if (!text) throw Error("cannot open " + text_path);
  std::map<std::string, LabelSeq> transcripts;
  std::string line;
  size_t line_no = 0;
  while (std::getline(text, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string id, sym;
    if (!(fields >> id)) continue;
    LabelSeq seq;
    while (fields >> sym) {
      auto l = labels.find(sym);
      if (!l || *l < kFirstSymbol) {
        throw ParseError(text_path + " line " + std::to_string(line_no) + ": unknown label '" + sym + "'");
      }
      seq.push_back(*l);
    }
    if (!transcripts.emplace(id, std::move(seq)).second) {
      throw ParseError(text_path + " line " + std::to_string(line_no) + ": duplicate id '" + id + "'");
    }
  }
  for (auto& u : utts) {
    auto it = transcripts.find(u.id);
    if (it == transcripts.end()) throw ParseError(text_path + ": no transcript for '" + u.id + "'");
    u.transcript = it->second;
  }
  return utts;
}

Alignment nearest_mean_labels(const Matrix& features, const Matrix& means) {
  Alignment out(static_cast<size_t>(features.rows()));
  for (Eigen::Index t = 0; t < features.rows(); ++t) {
    Eigen::Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < means.rows(); ++k) {
      const double d = (features.row(t) - means.row(k)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    out[t] = kFirstSymbol + static_cast<Label>(best);
  }
  return out;
}

}  // namespace catdesk
