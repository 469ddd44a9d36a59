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

#include "cli.h"

#ifdef CATDESK_CLI11_PACKAGE
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "catdesk/config.h"
#include "catdesk/data.h"
#include "catdesk/decode.h"
#include "catdesk/lm.h"
#include "catdesk/streaming.h"
#include "catdesk/topology.h"
#include "catdesk/trainer.h"

namespace catdesk::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Context {
  RunConfig cfg;
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

const std::string& require(const RunConfig& cfg, const std::string& key, const std::string& why) {
  if (!cfg.is_set(key)) throw UsageError("missing --" + key + ": " + why);
  return cfg.get(key);
}

// Label symbols come from <corpus_dir>/labels.txt when a corpus is configured,
// else from the default names for `alphabet`.
SymbolTable load_labels(const RunConfig& cfg) {
  if (cfg.is_set("corpus_dir")) {
    const fs::path p = fs::path(cfg.get("corpus_dir")) / "labels.txt";
    if (fs::exists(p)) return SymbolTable::read_file(p.string());
  }
  return make_label_symbols(default_label_names(cfg.get_int("alphabet")));
}

LabelSeq alphabet_of(const SymbolTable& labels) {
  LabelSeq out;
  for (const auto& [id, sym] : labels.by_id())
    if (id >= kFirstSymbol) out.push_back(id);
  return out;
}

std::vector<std::string> label_names(const SymbolTable& labels) {
  std::vector<std::string> out;
  for (Label l : alphabet_of(labels)) out.push_back(labels.symbol_of(l));
  return out;
}

ChunkPlan chunk_plan(const RunConfig& cfg) {
  ChunkPlan p;
  p.chunk_size = cfg.get_int("chunk_size");
  p.left_context = cfg.get_int("left_context");
  p.right_context = cfg.get_int("right_context");
  p.jitter_fraction = cfg.get_double("jitter_fraction");
  p.validate();
  return p;
}

InferenceMode inference_mode(TrainMode m) {
  switch (m) {
    case TrainMode::kWhole: return InferenceMode::kWhole;
    case TrainMode::kCsf: return InferenceMode::kChunkedReset;
    case TrainMode::kSf: return InferenceMode::kChunkedCopy;
  }
  return InferenceMode::kWhole;
}

TrainMode mode_of(const RunConfig& cfg) {
  try {
    return parse_train_mode(cfg.get("mode"));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

DecodeOptions decode_options(const RunConfig& cfg) {
  return DecodeOptions{cfg.get_double("beam"), cfg.get_int("max_active"), cfg.get_double("acoustic_scale")};
}

std::optional<DenominatorGraph> load_den(const RunConfig& cfg, const SymbolTable& labels) {
  if (!cfg.is_set("den_path")) return std::nullopt;
  return make_denominator(read_fst_file(cfg.get("den_path")), num_emissions(static_cast<int>(alphabet_of(labels).size())));
}

LabelDecoder make_decoder(const RunConfig& cfg, const std::optional<DenominatorGraph>& den) {
  const std::string& kind = cfg.get("decoder");
  if (kind == "greedy") return greedy_decoder();
  if (kind == "graph") {
    if (!den) throw UsageError("--decoder graph needs --den_path (build one with `catdesk build-den`)");
    return graph_decoder(den->graph, decode_options(cfg));
  }
  throw UsageError("unknown decoder '" + kind + "' (expected greedy or graph)");
}

int cmd_synth(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const fs::path out = require(cfg, "out_dir", "where to write the corpus");
  SynthSpec spec;
  spec.alphabet_size = cfg.get_int("alphabet");
  spec.input_dim = cfg.get_int("d_in");
  spec.noise_std = cfg.get_double("sigma");
  spec.min_duration = cfg.get_int("min_duration");
  spec.max_duration = cfg.get_int("max_duration");
  spec.min_labels = cfg.get_int("min_labels");
  spec.max_labels = cfg.get_int("max_labels");
  spec.num_utterances = cfg.get_int("num_utts");
  spec.successor_bias = cfg.get_double("successor_bias");
  spec.seed = cfg.get_u64("seed");
  const Corpus corpus = synth_corpus(spec);
  const SymbolTable labels = make_label_symbols(default_label_names(spec.alphabet_size));
  fs::create_directories(out);
  labels.write_file((out / "labels.txt").string());
  write_corpus(corpus.train, (out / "train").string(), labels);
  write_corpus(corpus.dev, (out / "dev").string(), labels);
  write_corpus(corpus.test, (out / "test").string(), labels);
  ctx.out << "synth: " << corpus.train.size() << " train, " << corpus.dev.size() << " dev, "
          << corpus.test.size() << " test utterances in " << out.string() << '\n';
  return kExitOk;
}

int cmd_train_lm(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const fs::path corpus = require(cfg, "corpus_dir", "the LM is estimated on <corpus_dir>/train");
  const std::string& lm_path = require(cfg, "lm_path", "where to write the ARPA file");
  const SymbolTable labels = load_labels(cfg);
  std::vector<std::vector<std::string>> transcripts;
  for (const auto& u : read_corpus((corpus / "train").string(), labels))
    transcripts.push_back(to_symbols(u.transcript, labels));
  const NGramLm lm = estimate_ngram(transcripts, cfg.get_int("lm_order"), label_names(labels));
  write_arpa_file(lm, lm_path);
  ctx.out << "train-lm: order " << lm.order() << " from " << transcripts.size() << " transcripts -> " << lm_path
          << '\n';
  return kExitOk;
}

int cmd_build_den(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const std::string& lm_path = require(cfg, "lm_path", "the denominator LM (see `catdesk train-lm`)");
  const std::string& den_path = require(cfg, "den_path", "where to write the graph");
  const SymbolTable labels = load_labels(cfg);
  const NGramLm lm = read_arpa_file(lm_path);
  const Wfst topology = build_ctc_topology(alphabet_of(labels));
  const DenominatorGraph den = build_denominator(topology, lm, labels);
  write_fst_file(den.graph, den_path);
  ctx.out << "build-den: " << den.graph.num_states() << " states, " << den.graph.num_arcs() << " arcs -> "
          << den_path << '\n';
  return kExitOk;
}

int cmd_train(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const fs::path corpus = require(cfg, "corpus_dir", "training reads <corpus_dir>/train and /dev");
  const std::string& model_path = require(cfg, "model_path", "where to save the best checkpoint");
  const TrainMode mode = mode_of(cfg);
  const std::string& loss_kind = cfg.get("loss");
  if (loss_kind != "crf" && loss_kind != "ctc") throw UsageError("unknown --loss '" + loss_kind + "' (crf or ctc)");
  if (loss_kind == "crf" && (!cfg.is_set("den_path") || !cfg.is_set("lm_path")))
    throw UsageError(
        "--loss crf needs the label LM and its denominator graph: run `catdesk train-lm` and `catdesk build-den`, "
        "then pass --lm_path and --den_path (or use --loss ctc)");
  if (mode != TrainMode::kWhole && !cfg.is_set("teacher_path"))
    throw UsageError("--mode " + cfg.get("mode") +
                     " needs --teacher_path, a whole-utterance checkpoint (train one with --mode whole)");

  const SymbolTable labels = load_labels(cfg);
  const std::vector<Utterance> train = read_corpus((corpus / "train").string(), labels);
  const std::vector<Utterance> dev = read_corpus((corpus / "dev").string(), labels);
  if (train.empty()) throw Error("no training utterances in " + (corpus / "train").string());

  const LabelSeq alphabet = alphabet_of(labels);
  const Wfst topology = build_ctc_topology(alphabet);
  const std::optional<DenominatorGraph> den = load_den(cfg, labels);
  std::optional<NGramLm> lm;
  SequenceLoss loss;
  if (loss_kind == "ctc") {
    loss = make_ctc_loss();
  } else {
    // The numerator needs log p(l) from the same LM that built T_den.
    lm = read_arpa_file(cfg.get("lm_path"));
    loss = CtcCrfObjective(topology, *den, &*lm, labels, cfg.get_double("alpha"));
  }

  const AmShape shape{static_cast<int>(train.front().features.cols()), cfg.get_int("d_h"),
                      num_emissions(static_cast<int>(alphabet.size()))};
  std::optional<ModelParams> teacher;
  if (mode != TrainMode::kWhole) {
    teacher = read_checkpoint(cfg.get("teacher_path"));
    if (!(teacher->shape == shape)) throw Error("teacher checkpoint shape does not match the configured model");
  }
  // Chunked students start from the teacher's weights.
  const ModelParams init = teacher ? *teacher : ModelParams::random(shape, cfg.get_u64("seed"));

  TrainOptions opts;
  opts.mode = mode;
  opts.epochs = cfg.get_int("epochs");
  opts.batch_size = cfg.get_int("batch_size");
  opts.workers = cfg.get_int("workers");
  opts.seed = cfg.get_u64("seed");
  opts.optim.learning_rate = cfg.get_double("lr");
  opts.optim.clip_norm = cfg.get_double("clip_norm");
  opts.plan = chunk_plan(cfg);
  opts.twin_lambda = cfg.get_double("lambda");
  opts.eval_mode = inference_mode(mode);

  std::ofstream log_file;
  if (cfg.is_set("log_path")) {
    log_file.open(cfg.get("log_path"), std::ios::app);
    if (!log_file) throw Error("cannot open log " + cfg.get("log_path"));
    opts.log = &log_file;
  } else {
    opts.log = &ctx.out;
  }

  const TrainResult result =
      train_model(init, train, dev, loss, make_decoder(cfg, den), opts, teacher ? &*teacher : nullptr);
  write_checkpoint(result.best, model_path);
  const EpochRecord& best = result.history[static_cast<size_t>(result.best_epoch - 1)];
  ctx.out << "train: best epoch " << best.epoch << " dev PER " << format_double(best.dev_per) << " -> "
          << model_path << '\n';
  if (result.skipped > 0) ctx.err << "train: skipped " << result.skipped << " infeasible utterance passes\n";
  return kExitOk;
}

int cmd_decode(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const fs::path corpus = require(cfg, "corpus_dir", "decoding reads <corpus_dir>/<split>");
  const std::string& model_path = require(cfg, "model_path", "the acoustic model checkpoint");
  const TrainMode mode = mode_of(cfg);
  const SymbolTable labels = load_labels(cfg);
  const ModelParams params = read_checkpoint(model_path);
  const std::optional<DenominatorGraph> den = load_den(cfg, labels);
  const std::vector<Utterance> utts = read_corpus((corpus / cfg.get("split")).string(), labels);
  const ChunkPlan plan = chunk_plan(cfg);
  const bool graph = cfg.get("decoder") == "graph";
  if (!graph) make_decoder(cfg, den);  // validates the decoder name

  std::ofstream file;
  std::ostream* os = &ctx.out;
  if (cfg.is_set("hyp_path")) {
    file.open(cfg.get("hyp_path"));
    if (!file) throw Error("cannot open " + cfg.get("hyp_path"));
    os = &file;
  }
  for (const auto& u : utts) {
    const FrameLogits logits = infer_logits(params, u.features, inference_mode(mode), plan);
    TranscriptLine line{u.id, 0.0, {}};
    LabelSeq hyp;
    if (graph) {
      if (!den) throw UsageError("--decoder graph needs --den_path");
      const Hypothesis h = beam_decode(den->graph, logits, decode_options(cfg));
      hyp.assign(h.tokens.begin(), h.tokens.end());
      line.score = h.score;
    } else {
      hyp = greedy_decode(logits);
      line.score = log_softmax_rows(logits).rowwise().maxCoeff().sum();
    }
    line.tokens = to_symbols(hyp, labels);
    write_hypothesis_line(*os, line);
  }
  return kExitOk;
}

std::vector<TranscriptLine> read_lines_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  return read_transcript_lines(is);
}

int cmd_score(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const std::string& ref = require(cfg, "ref_path", "reference transcripts (e.g. <corpus>/test/text)");
  const std::string& hyp = require(cfg, "hyp_path", "hypotheses written by `catdesk decode`");
  const ScoreReport report = score_transcripts(read_lines_file(ref), read_lines_file(hyp));
  ctx.out << format_score(report) << '\n';
  if (report.missing > 0) ctx.err << "score: " << report.missing << " references had no hypothesis\n";
  return kExitOk;
}

int cmd_stream_demo(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const std::string& model_path = require(cfg, "model_path", "the acoustic model checkpoint");
  const ModelParams params = read_checkpoint(model_path);
  const TrainMode mode = mode_of(cfg);
  ChunkPlan plan = chunk_plan(cfg);
  plan.jitter_fraction = 0.0;
  ChunkMode chunk_mode = ChunkMode::kReset;
  if (mode == TrainMode::kSf) {
    plan = sf_plan(plan);
    chunk_mode = ChunkMode::kCopyForward;
  }
  StreamingRecognizer rec(params, plan, chunk_mode);
  const int64_t bound = plan.chunk_size + plan.right_context;
  int64_t max_lag = 0;
  int64_t emitted = 0;
  auto print = [&](const std::vector<EmittedFrame>& rows) {
    for (const auto& f : rows) {
      max_lag = std::max(max_lag, f.lag());
      ++emitted;
      ctx.out << f.index << ' ' << f.lag();
      for (Eigen::Index c = 0; c < f.logits.size(); ++c) ctx.out << ' ' << format_double(f.logits(c));
      ctx.out << '\n';
    }
  };

  std::string line;
  int64_t index = 0;
  std::vector<double> frame;
  while (std::getline(ctx.in, line)) {
    std::istringstream ls(line);
    frame.clear();
    double v;
    while (ls >> v) frame.push_back(v);
    if (!ls.eof()) throw ParseError("stdin line " + std::to_string(index + 1) + ": not a number");
    if (frame.empty()) continue;
    if (static_cast<int>(frame.size()) != params.shape.input_dim)
      throw ParseError("stdin line " + std::to_string(index + 1) + ": expected " +
                       std::to_string(params.shape.input_dim) + " values, got " + std::to_string(frame.size()));
    print(rec.push(index++, frame));
  }
  print(rec.finish());

  const double latency = context_latency_ms(plan.right_context, cfg.get_double("frame_shift_ms"),
                                            cfg.get_int("sampling_factor"));
  ctx.out << "# frames " << emitted << " max-lag " << max_lag << " bound " << bound << " context-latency-ms "
          << format_double(latency) << '\n';
  if (max_lag > bound) {
    ctx.err << "stream-demo: lag " << max_lag << " exceeds chunk_size + right_context = " << bound << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

struct Command {
  const char* name;
  const char* help;
  int (*fn)(Context&);
};

constexpr Command kCommands[] = {
    {"synth", "Generate a synthetic corpus (train/dev/test) under --out_dir", cmd_synth},
    {"train-lm", "Estimate the label n-gram LM (Witten-Bell) and write ARPA", cmd_train_lm},
    {"build-den", "Compose the CTC topology with the LM into the denominator graph", cmd_build_den},
    {"train", "Train the acoustic model (--mode whole|csf|sf, --loss crf|ctc)", cmd_train},
    {"decode", "Decode a corpus split and write hypotheses", cmd_decode},
    {"score", "Score hypotheses against references: PER S I D", cmd_score},
    {"stream-demo", "Stream frames from stdin through the chunked recognizer", cmd_stream_demo},
};

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"catdesk: CTC-CRF training, decoding and streaming on synthetic data", "catdesk"};
  app.require_subcommand(1);
  std::string config_path;
  std::map<std::string, std::string> flags;
  std::map<std::string, CLI::App*> subs;
  for (const Command& c : kCommands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "key=value config file");
    for (const auto& [key, def] : RunConfig::defaults()) {
      std::string names = "--" + key;
      if (key.find('_') != std::string::npos) {
        std::string dashed = key;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        names += ",--" + dashed;
      }
      sub->add_option_function<std::string>(
             names, [&flags, key = key](const std::string& v) { flags[key] = v; },
             def.empty() ? std::string("(unset)") : "default " + def)
          ->type_name("VALUE");
    }
    subs[c.name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    return kExitUsage;
  }

  for (const Command& c : kCommands) {
    if (!subs[c.name]->parsed()) continue;
    try {
      Context ctx{RunConfig(), in, out, err};
      if (!config_path.empty()) ctx.cfg.load_file(config_path);
      ctx.cfg.apply_environment();
      for (const auto& [k, v] : flags) ctx.cfg.set(k, v);
      return c.fn(ctx);
    } catch (const UsageError& e) {
      err << "catdesk " << c.name << ": " << e.what() << '\n';
      return kExitUsage;
    } catch (const std::exception& e) {
      err << "catdesk " << c.name << ": " << e.what() << '\n';
      return kExitFailure;
    }
  }
  return kExitUsage;
}

}  // namespace catdesk::cli
