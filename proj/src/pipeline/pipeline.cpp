// Copyright 2026 The smoodi-desk Authors.
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

#include "smoodi/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "smoodi/error.hpp"

namespace smoodi {

namespace fs = std::filesystem;
using num::Tensor;

std::string_view name(Stage s) {
  switch (s) {
    case Stage::kData: return "data";
    case Stage::kCodec: return "codec";
    case Stage::kBase: return "base";
    case Stage::kOracles: return "oracles";
    case Stage::kAdaptor: return "adaptor";
  }
  return "?";
}

std::string_view command(Stage s) {
  switch (s) {
    case Stage::kData: return "gen-data";
    case Stage::kCodec: return "train-codec";
    case Stage::kBase: return "train-base";
    case Stage::kOracles: return "train-oracles";
    case Stage::kAdaptor: return "train-adaptor";
  }
  return "?";
}

namespace {

std::vector<std::string> stage_prefixes(Stage s) {
  switch (s) {
    case Stage::kData: return {"data."};
    case Stage::kCodec: return {"data.", "codec."};
    case Stage::kBase: return {"data.", "codec.", "schedule.", "base."};
    case Stage::kOracles: return {"data.", "oracle.", "gates.oracle"};
    case Stage::kAdaptor:
      return {"data.", "codec.", "schedule.", "base.", "adaptor.", "gates.base"};
  }
  return {};
}

std::vector<Stage> upstream(Stage s) {
  switch (s) {
    case Stage::kData: return {};
    case Stage::kCodec: return {Stage::kData};
    case Stage::kBase: return {Stage::kData, Stage::kCodec};
    case Stage::kOracles: return {Stage::kData};
    case Stage::kAdaptor: return {Stage::kData, Stage::kCodec, Stage::kBase, Stage::kOracles};
  }
  return {};
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp);
    require(os.good(), ErrorCode::kIo, "cannot write " + tmp.string());
    os << text;
    require(os.good(), ErrorCode::kIo, "failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_first_line(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), ErrorCode::kIo, "cannot read " + path.string());
  std::string line;
  std::getline(is, line);
  return line;
}

std::vector<int> contents_of(const std::vector<motion::MotionSequence>& seqs) {
  std::vector<int> out;
  for (const auto& s : seqs) out.push_back(static_cast<int>(s.content));
  return out;
}

std::vector<int> styles_of(const std::vector<motion::MotionSequence>& seqs) {
  std::vector<int> out;
  for (const auto& s : seqs) out.push_back(static_cast<int>(s.style));
  return out;
}

void write_curve(const fs::path& path, const std::vector<double>& loss) {
  std::string text = "epoch,loss\n";
  char buf[64];
  for (std::size_t e = 0; e < loss.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g\n", e, loss[e]);
    text += buf;
  }
  write_text(path, text);
}

// Seeds of the derived sets, fixed offsets from data.seed.
constexpr std::uint64_t kCodecCoverage = 0xc0dec;
constexpr std::uint64_t kCodecHeldout = 0x4e1d;
constexpr std::uint64_t kOracleCoverage = 0x0ac1e;

}  // namespace

std::string checkpoint_field(const fs::path& path, std::string_view key) {
  return num::header_field(read_first_line(path), key);
}

Pipeline::Pipeline(RunConfig config, fs::path root, std::ostream* log)
    : config_(std::move(config)), root_(std::move(root)), log_(log) {}

fs::path Pipeline::default_root() {
  const char* env = std::getenv("SMOODI_OUT");
  return env && *env ? fs::path(env) : fs::path("out");
}

std::ostream& Pipeline::log() const {
  static std::ofstream null;
  return log_ ? *log_ : null;
}

std::string Pipeline::stage_hash(Stage s) const { return config_.hash(stage_prefixes(s)); }

fs::path Pipeline::stage_dir(Stage s) const {
  return root_ / std::string(name(s)) / stage_hash(s);
}

bool Pipeline::complete(Stage s) const { return fs::exists(stage_dir(s) / "stage.txt"); }

void Pipeline::require_complete(Stage s) const {
  require(complete(s), ErrorCode::kMissingStage,
          "missing " + std::string(name(s)) + " artifacts for this config (expected " +
              stage_dir(s).string() + "); run `smoodi " + std::string(command(s)) + "` first");
}

void Pipeline::finish(Stage s) const {
  std::string text = "stage=" + std::string(name(s)) + "\nconfig_hash=" + stage_hash(s) + "\n";
  for (const auto& line : config_.echo()) text += line + "\n";
  write_text(stage_dir(s) / "stage.txt", text);
  write_text(root_ / std::string(name(s)) / "latest", stage_hash(s) + "\n");
}

void Pipeline::run(Stage s, bool force) {
  for (Stage u : upstream(s)) require_complete(u);
  if (complete(s) && !force) {
    log() << name(s) << ": up to date (" << stage_dir(s).string() << ")\n";
    return;
  }
  const fs::path dir = stage_dir(s);
  fs::create_directories(dir);
  fs::remove(dir / "stage.txt");
  const auto t0 = std::chrono::steady_clock::now();
  log() << name(s) << ": running in " << dir.string() << "\n";
  switch (s) {
    case Stage::kData: gen_data(dir); break;
    case Stage::kCodec: train_codec_stage(dir); break;
    case Stage::kBase: train_base_stage(dir); break;
    case Stage::kOracles: train_oracles_stage(dir); break;
    case Stage::kAdaptor: train_adaptor_stage(dir); break;
  }
  finish(s);
  log() << name(s) << ": done in "
        << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
        << " s\n";
}

void Pipeline::run_all() {
  for (Stage s : {Stage::kData, Stage::kCodec, Stage::kBase, Stage::kOracles, Stage::kAdaptor})
    run(s);
}

// --- config mapping -----------------------------------------------------------

NoiseSchedule Pipeline::schedule() const {
  return NoiseSchedule(config_.get_int("schedule.timesteps"),
                       config_.get_float("schedule.beta_start"),
                       config_.get_float("schedule.beta_end"));
}

CodecConfig Pipeline::codec_config() const {
  CodecConfig c;
  c.latent_dim = config_.get_int("codec.latent_dim");
  c.hidden = config_.get_int("codec.hidden");
  c.epochs = config_.get_int("codec.epochs");
  c.batch = config_.get_int("codec.batch");
  c.lr = config_.get_float("codec.lr");
  c.seed = config_.get_u64("codec.seed");
  return c;
}

DenoiserConfig Pipeline::denoiser_config() const {
  DenoiserConfig c;
  c.latent_dim = config_.get_int("codec.latent_dim");
  c.d_model = config_.get_int("base.d_model");
  c.blocks = config_.get_int("base.blocks");
  c.heads = config_.get_int("base.heads");
  c.ffn = config_.get_int("base.ffn");
  c.tokens = config_.get_int("base.tokens");
  c.timesteps = config_.get_int("schedule.timesteps");
  return c;
}

BaseTrainConfig Pipeline::base_train_config() const {
  BaseTrainConfig c;
  c.epochs = config_.get_int("base.epochs");
  c.batch = config_.get_int("base.batch");
  c.lr = config_.get_float("base.lr");
  c.content_dropout = config_.get_float("base.content_dropout");
  c.seed = config_.get_u64("base.seed");
  return c;
}

OracleConfig Pipeline::oracle_config(OracleKind kind, bool eval_only) const {
  OracleConfig c;
  c.kind = kind;
  c.d_model = config_.get_int("oracle.d_model");
  c.feature_dim = config_.get_int("oracle.feature_dim");
  c.epochs = config_.get_int("oracle.epochs");
  c.batch = config_.get_int("oracle.batch");
  c.lr = config_.get_float("oracle.lr");
  c.seed = config_.get_u64(eval_only ? "oracle.eval_seed" : "oracle.seed");
  return c;
}

TrainerConfig Pipeline::trainer_config() const {
  TrainerConfig c;
  c.lambda_pr = config_.get_float("adaptor.lambda_pr");
  c.lambda_cyc = config_.get_float("adaptor.lambda_cyc");
  c.lr = config_.get_float("adaptor.lr");
  c.batch = config_.get_int("adaptor.batch");
  c.epochs = config_.get_int("adaptor.epochs");
  c.content_dropout = config_.get_float("adaptor.content_dropout");
  c.style_mask = config_.get_float("adaptor.style_mask");
  c.seed = config_.get_u64("adaptor.seed");
  return c;
}

GuidanceWeights Pipeline::guidance_weights() const {
  return {config_.get_float("guidance.w_c"), config_.get_float("guidance.w_s")};
}

ClassifierGuidanceConfig Pipeline::guidance_config() const {
  ClassifierGuidanceConfig c;
  c.tau = config_.get_float("guidance.tau");
  c.k_early = config_.get_int("guidance.k_early");
  c.k_late = config_.get_int("guidance.k_late");
  c.t_switch = config_.get_int("guidance.t_switch");
  c.grad_mode = parse_grad_mode(config_.get("guidance.grad_mode"));
  c.sign = parse_guidance_sign(config_.get("guidance.sign"));
  c.validate();
  return c;
}

TransferConfig Pipeline::transfer_config() const {
  TransferConfig c;
  c.steps = config_.get_int("transfer.steps");
  c.weights = {config_.get_float("guidance.w_c"), config_.get_float("transfer.w_s")};
  c.guidance = guidance_config();
  c.guidance.tau = config_.get_float("transfer.tau");
  c.inversion_w_c = config_.get_float("transfer.inversion_w_c");
  return c;
}

EvalConfig Pipeline::eval_config() const {
  EvalConfig c;
  c.samples = config_.get_int("eval.samples");
  c.seed = config_.get_u64("eval.seed");
  c.batch = config_.get_int("eval.batch");
  c.steps = config_.get_int("sample.steps");
  c.weights = guidance_weights();
  c.guidance = guidance_config();
  c.kinematic_threshold = config_.get_float("eval.kinematic_threshold");
  c.diversity_pairs = config_.get_int("eval.diversity_pairs");
  return c;
}

// --- stages ---------------------------------------------------------------------

void Pipeline::gen_data(const fs::path& dir) {
  const auto seed = config_.get_u64("data.seed");
  const auto a = motion::CorpusSpec::corpus_a(config_.get_int("data.per_cell_a"), seed);
  const auto b = motion::CorpusSpec::corpus_b(config_.get_int("data.per_cell_b"), seed);
  const auto norm = motion::corpus_normalization(a, b);
  const auto da = motion::generate_corpus(a, norm, dir / "corpus_a.smd");
  const auto db = motion::generate_corpus(b, norm, dir / "corpus_b.smd");
  log() << "  corpus A " << da.sequences.size() << " sequences, corpus B "
        << db.sequences.size() << "\n";
}

motion::Normalization Pipeline::normalization() const {
  require_complete(Stage::kData);
  return motion::read_dataset(stage_dir(Stage::kData) / "corpus_a.smd").norm;
}

TrainingData Pipeline::training_data() const {
  require_complete(Stage::kData);
  TrainingData d;
  auto a = motion::read_dataset(stage_dir(Stage::kData) / "corpus_a.smd");
  auto b = motion::read_dataset(stage_dir(Stage::kData) / "corpus_b.smd");
  d.norm = a.norm;
  d.a = std::move(a.sequences);
  d.b = std::move(b.sequences);
  return d;
}

void Pipeline::train_codec_stage(const fs::path& dir) {
  const TrainingData d = training_data();
  const auto seed = config_.get_u64("data.seed");
  std::vector<motion::MotionSequence> train(d.a);
  train.insert(train.end(), d.b.begin(), d.b.end());
  const auto cov = motion::coverage_set(config_.get_int("codec.coverage_per_cell"),
                                        seed ^ kCodecCoverage);
  train.insert(train.end(), cov.begin(), cov.end());
  const auto held = motion::coverage_set(2, seed ^ kCodecHeldout);
  CodecReport rep;
  const Codec codec = train_codec(stack_normalized(train, d.norm), stack_normalized(held, d.norm),
                                  codec_config(), &rep);
  write_curve(dir / "codec_loss.csv", rep.epoch_loss);
  std::string text = "train_rmse=" + std::to_string(rep.train_rmse_all) +
                     "\nheldout_rmse=" + std::to_string(rep.heldout_rmse_all) +
                     "\nlatent_roundtrip=" + std::to_string(rep.latent_roundtrip) + "\n";
  for (int c = 0; c < motion::kChannels; ++c)
    text += "heldout_rmse." + std::string(motion::channel_names()[static_cast<std::size_t>(c)]) +
            "=" + std::to_string(rep.heldout_rmse[static_cast<std::size_t>(c)]) + "\n";
  write_text(dir / "codec_report.txt", text);
  log() << "  codec held-out RMSE " << rep.heldout_rmse_all << ", train " << rep.train_rmse_all
        << "\n";
  check_codec_gates(rep);
  codec.save(dir / "codec.ckpt", "config_hash=" + stage_hash(Stage::kCodec) +
                                     " data_hash=" + stage_hash(Stage::kData));
}

void Pipeline::train_base_stage(const fs::path& dir) {
  const TrainingData d = training_data();
  const Codec codec = Codec::load(stage_dir(Stage::kCodec) / "codec.ckpt");
  const Tensor latents = codec.encode(stack_normalized(d.a, d.norm));
  BaseTrainReport rep;
  const Denoiser base = train_base(latents, contents_of(d.a), schedule(), denoiser_config(),
                                   base_train_config(), &rep);
  write_curve(dir / "base_loss.csv", rep.epoch_loss);
  log() << "  base loss " << rep.epoch_loss.front() << " -> " << rep.epoch_loss.back() << "\n";
  base.save(dir / "base.ckpt", "config_hash=" + stage_hash(Stage::kBase) +
                                   " codec_hash=" + stage_hash(Stage::kCodec));
}

void Pipeline::train_oracles_stage(const fs::path& dir) {
  const TrainingData d = training_data();
  std::vector<motion::MotionSequence> all(d.a);
  all.insert(all.end(), d.b.begin(), d.b.end());
  const auto cov = motion::coverage_set(config_.get_int("oracle.coverage_per_cell"),
                                        config_.get_u64("data.seed") ^ kOracleCoverage);
  all.insert(all.end(), cov.begin(), cov.end());
  const Tensor x = stack_normalized(all, d.norm);
  const auto ys = styles_of(all), yc = contents_of(all);
  const float gate = config_.get_float("gates.oracle_accuracy");
  const std::string extra = "config_hash=" + stage_hash(Stage::kOracles) +
                            " data_hash=" + stage_hash(Stage::kData);
  std::string text;
  struct Job {
    const char* file;
    OracleKind kind;
    bool eval_only;
  };
  for (const Job& job : {Job{"style.ckpt", OracleKind::kStyle, false},
                         Job{"style_eval.ckpt", OracleKind::kStyle, true},
                         Job{"content.ckpt", OracleKind::kContent, false}}) {
    OracleReport rep;
    const Oracle o = train_oracle(x, job.kind == OracleKind::kStyle ? ys : yc,
                                  oracle_config(job.kind, job.eval_only), &rep);
    text += std::string(job.file) + ".heldout_accuracy=" + std::to_string(rep.heldout_accuracy) +
            "\n";
    log() << "  " << job.file << " held-out accuracy " << rep.heldout_accuracy << "\n";
    write_text(dir / "oracle_report.txt", text);
    require(rep.heldout_accuracy >= gate, ErrorCode::kGateFailed,
            std::string(job.file) + " held-out accuracy " + std::to_string(rep.heldout_accuracy) +
                " is below the gate " + std::to_string(gate));
    o.save(dir / job.file, extra);
  }
}

double Pipeline::check_base_gate() {
  require_complete(Stage::kBase);
  require_complete(Stage::kOracles);
  const fs::path cache = stage_dir(Stage::kBase) / "gate.txt";
  const float gate = config_.get_float("gates.base_cra");
  double cra = -1;
  const std::string key = "oracles_hash=" + stage_hash(Stage::kOracles);
  if (fs::exists(cache)) {
    std::ifstream is(cache);
    std::string l1, l2;
    std::getline(is, l1);
    std::getline(is, l2);
    if (l1 == key && l2.rfind("cra=", 0) == 0) cra = std::stod(l2.substr(4));
  }
  if (cra < 0) {
    const ModelSet m = load_models(false);
    TrainingData d = training_data();
    EvalConfig e = eval_config();
    e.use_style = false;
    e.guidance.tau = 0;
    e.weights.w_s = 0;
    cra = run_eval(m, d.b, e).cra;
    write_text(cache, key + "\ncra=" + std::to_string(cra) + "\n");
  }
  log() << "  base content accuracy (unstyled) " << cra << "\n";
  require(cra >= gate, ErrorCode::kGateFailed,
          "base model content accuracy " + std::to_string(cra) + " is below the gate " +
              std::to_string(gate));
  return cra;
}

void Pipeline::train_adaptor_stage(const fs::path& dir) {
  check_base_gate();
  const TrainingData d = training_data();
  const ModelSet m = load_models(false);
  const std::string extra = "config_hash=" + stage_hash(Stage::kAdaptor) +
                            " base_hash=" + stage_hash(Stage::kBase) +
                            " codec_hash=" + stage_hash(Stage::kCodec);
  AdaptorTrainReport rep;
  const auto t0 = std::chrono::steady_clock::now();
  const TrainerConfig tc = trainer_config();
  const Adaptor adaptor = train_adaptor(
      d, m.codec, m.base, m.schedule, tc, &rep, [&](int epoch, const Adaptor& a) {
        a.save(dir / "adaptor.ckpt", extra + " epoch=" + std::to_string(epoch));
        if (epoch % 10 == 9 || epoch + 1 == tc.epochs)
          log() << "  epoch " << epoch + 1 << " ("
                << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
                << " s)\n";
      });
  write_loss_csv(dir / "losses.csv", rep);
  if (!rep.epochs.empty())
    log() << "  loss_all " << rep.epochs.front().all << " -> " << rep.epochs.back().all << "\n";
  adaptor.save(dir / "adaptor.ckpt", extra + " epoch=final");
}

ModelSet Pipeline::load_models(bool with_adaptor, bool allow_mixed) const {
  for (Stage s : {Stage::kData, Stage::kCodec, Stage::kBase, Stage::kOracles}) require_complete(s);
  if (with_adaptor) require_complete(Stage::kAdaptor);
  ModelSet m;
  m.schedule = schedule();
  m.norm = normalization();
  const fs::path codec = stage_dir(Stage::kCodec) / "codec.ckpt";
  const fs::path base = stage_dir(Stage::kBase) / "base.ckpt";
  const fs::path oracles = stage_dir(Stage::kOracles);
  m.codec = Codec::load(codec);
  m.base = Denoiser::load(base);
  m.style_oracle = Oracle::load(oracles / "style.ckpt");
  m.eval_style_oracle = Oracle::load(oracles / "style_eval.ckpt");
  m.content_oracle = Oracle::load(oracles / "content.ckpt");

  std::vector<std::string> mixed;
  auto expect = [&](const fs::path& file, std::string_view key, const std::string& want) {
    const std::string got = checkpoint_field(file, key);
    if (got != want)
      mixed.push_back(file.filename().string() + " " + std::string(key) + "=" + got +
                      " (expected " + want + ")");
  };
  expect(base, "codec_hash", checkpoint_field(codec, "config_hash"));
  expect(oracles / "style.ckpt", "data_hash", checkpoint_field(codec, "data_hash"));
  expect(oracles / "content.ckpt", "data_hash", checkpoint_field(codec, "data_hash"));
  if (with_adaptor) {
    const fs::path ad = stage_dir(Stage::kAdaptor) / "adaptor.ckpt";
    expect(ad, "base_hash", checkpoint_field(base, "config_hash"));
    expect(ad, "codec_hash", checkpoint_field(codec, "config_hash"));
    require(checkpoint_field(ad, "epoch") == "final", ErrorCode::kMissingStage,
            "adaptor checkpoint is from an interrupted run; rerun `smoodi train-adaptor`");
    m.adaptor = Adaptor::load(ad, m.base);
  }
  if (!mixed.empty() && !allow_mixed) {
    std::string msg = "checkpoints come from different configurations:";
    for (const auto& s : mixed) msg += " " + s + ";";
    fail(ErrorCode::kMixedCheckpoints, msg + " pass --allow-mixed to override");
  }
  return m;
}

}  // namespace smoodi
