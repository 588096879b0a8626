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

// Base noise predictor eps(z_t, t, c).
//
// The latent is expanded into `tokens` learned tokens (plus positional
// embedding) and a conditioning token (content embedding + time embedding)
// is appended. `blocks` pre-norm encoder blocks run over the T = tokens + 1
// sequence; block i optionally receives an additive residual on its input.
// The latent tokens are mean-pooled and projected back to the latent size.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smoodi/numerics/params.hpp"
#include "smoodi/schedule.hpp"

namespace smoodi {

/// Content ids 0..5 are labels; 6 is the learned null condition.
inline constexpr int kNullContent = 6;
inline constexpr int kContentSlots = 7;

struct DenoiserConfig {
  int latent_dim = 32;
  int d_model = 64;
  int blocks = 4;
  int heads = 2;
  int ffn = 128;
  int tokens = 4;
  int timesteps = 1000;
};

class Denoiser {
 public:
  Denoiser() = default;
  Denoiser(const DenoiserConfig& config, num::Rng& rng);

  const DenoiserConfig& config() const noexcept { return config_; }
  std::int64_t sequence_length() const noexcept { return config_.tokens + 1; }

  /// Input token sequence [B, tokens + 1, d_model].
  num::Var embed(const num::Bound& p, num::Var z, std::span<const int> t,
                 std::span<const int> content) const;

  /// Runs the blocks. `residuals`, when given, holds exactly one
  /// [B, tokens + 1, d_model] correction per block, added to that block's
  /// input. `prefix` selects the block parameters ("block" for the base,
  /// a different prefix for a copy living in another store).
  num::Var blocks(const num::Bound& p, num::Var x,
                  const std::vector<num::Var>* residuals,
                  const std::string& prefix = "block") const;

  /// Final norm, pooling over latent tokens, projection to [B, latent_dim].
  num::Var head(const num::Bound& p, num::Var x) const;

  num::Var predict(const num::Bound& p, num::Var z, std::span<const int> t,
                   std::span<const int> content,
                   const std::vector<num::Var>* residuals = nullptr) const;

  /// Convenience evaluation on tensors.
  num::Tensor predict_noise(const num::Tensor& z, std::span<const int> t,
                            std::span<const int> content,
                            const std::vector<num::Tensor>* residuals = nullptr) const;

  const num::ParameterStore& params() const noexcept { return params_; }
  num::ParameterStore& mutable_params() noexcept { return params_; }

  void save(const std::filesystem::path& path, const std::string& extra = {}) const;
  static Denoiser load(const std::filesystem::path& path, std::string* header = nullptr);

 private:
  void check_inputs(const num::Shape& z, std::span<const int> t,
                    std::span<const int> content) const;

  DenoiserConfig config_;
  num::ParameterStore params_;
};

struct BaseTrainConfig {
  int epochs = 400;
  int batch = 64;
  float lr = 1e-3f;
  float content_dropout = 0.1f;
  std::uint64_t seed = 2;
};

struct BaseTrainReport {
  std::vector<double> epoch_loss;
};

/// Standard noise-prediction training on clean latents [N, d] with labels
/// `content` (0..5). Each item's label is replaced by the null condition
/// with probability `content_dropout`.
Denoiser train_base(const num::Tensor& latents, std::span<const int> content,
                    const NoiseSchedule& schedule, const DenoiserConfig& config,
                    const BaseTrainConfig& train, BaseTrainReport* report = nullptr);

}  // namespace smoodi
