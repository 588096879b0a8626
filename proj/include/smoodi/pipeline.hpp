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

#pragma once

// Staged training and model loading over an output tree:
//
//   <root>/<stage>/<stage-hash>/...   artifacts, plus stage.txt when complete
//   <root>/<stage>/latest             hash of the most recent completed run
//
// A stage hash covers only the config keys the stage (and its upstream
// stages) read, so ablations that touch adaptor keys reuse the codec, base
// and oracles.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "smoodi/config.hpp"
#include "smoodi/eval.hpp"
#include "smoodi/models.hpp"
#include "smoodi/sampler.hpp"
#include "smoodi/trainer.hpp"

namespace smoodi {

enum class Stage { kData, kCodec, kBase, kOracles, kAdaptor };

std::string_view name(Stage s);
/// The CLI subcommand that produces the stage.
std::string_view command(Stage s);

class Pipeline {
 public:
  Pipeline(RunConfig config, std::filesystem::path root, std::ostream* log = nullptr);

  /// $SMOODI_OUT if set, else "out".
  static std::filesystem::path default_root();

  const RunConfig& config() const noexcept { return config_; }
  const std::filesystem::path& root() const noexcept { return root_; }

  std::string stage_hash(Stage s) const;
  std::filesystem::path stage_dir(Stage s) const;
  bool complete(Stage s) const;

  /// Runs one stage. Upstream stages must be complete (kMissingStage names
  /// the command to run first). A complete stage is reused unless `force`.
  void run(Stage s, bool force = false);
  /// Runs every stage in order, reusing complete ones.
  void run_all();

  /// Unstyled content accuracy of the base over eval.samples draws; cached
  /// in the base stage directory. Throws kGateFailed below gates.base_cra.
  double check_base_gate();

  motion::Normalization normalization() const;
  TrainingData training_data() const;
  /// Loads every frozen model (the adaptor only when `with_adaptor`) and
  /// checks that the recorded upstream hashes agree.
  ModelSet load_models(bool with_adaptor, bool allow_mixed = false) const;

  NoiseSchedule schedule() const;
  CodecConfig codec_config() const;
  DenoiserConfig denoiser_config() const;
  BaseTrainConfig base_train_config() const;
  OracleConfig oracle_config(OracleKind kind, bool eval_only) const;
  TrainerConfig trainer_config() const;
  GuidanceWeights guidance_weights() const;
  ClassifierGuidanceConfig guidance_config() const;
  TransferConfig transfer_config() const;
  EvalConfig eval_config() const;

 private:
  void require_complete(Stage s) const;
  void finish(Stage s) const;
  void gen_data(const std::filesystem::path& dir);
  void train_codec_stage(const std::filesystem::path& dir);
  void train_base_stage(const std::filesystem::path& dir);
  void train_oracles_stage(const std::filesystem::path& dir);
  void train_adaptor_stage(const std::filesystem::path& dir);
  std::ostream& log() const;

  RunConfig config_;
  std::filesystem::path root_;
  std::ostream* log_;
};

/// Header field `config_hash` of a checkpoint file.
std::string checkpoint_field(const std::filesystem::path& path, std::string_view key);

}  // namespace smoodi
