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

// Motion autoencoder. Frames [B, 64, 8] (normalized) <-> latent [B, d].
//
// Encoder and decoder are two-layer GELU MLPs over the flattened sequence.
// After training the encoder output is standardized per latent dimension
// (`latent.mean`, `latent.std`) so the diffusion prior sees roughly unit
// variance codes; those two tensors are part of the frozen checkpoint.

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "smoodi/motion.hpp"
#include "smoodi/numerics/params.hpp"

namespace smoodi {

struct CodecConfig {
  int latent_dim = 32;
  int hidden = 256;
  int epochs = 80;
  int batch = 64;
  float lr = 5e-4f;
  std::uint64_t seed = 1;
};

class Codec {
 public:
  Codec() = default;
  Codec(const CodecConfig& config, num::Rng& rng);

  int latent_dim() const noexcept { return latent_dim_; }

  num::Var encode(const num::Bound& p, num::Var frames) const;
  num::Var decode(const num::Bound& p, num::Var z) const;

  /// [B, 64, 8] -> [B, d]
  num::Tensor encode(const num::Tensor& frames) const;
  /// [B, d] -> [B, 64, 8]
  num::Tensor decode(const num::Tensor& z) const;

  const num::ParameterStore& params() const noexcept { return params_; }
  num::ParameterStore& mutable_params() noexcept { return params_; }

  /// Names the optimizer may touch (excludes the latent standardization).
  std::vector<std::string> trainable_names() const;

  /// Header "codec v1 d=.. N=.. H=.. frozen_checksum=.." plus `extra`
  /// key=value tokens.
  void save(const std::filesystem::path& path, const std::string& extra = {}) const;
  /// Verifies the recorded checksum.
  static Codec load(const std::filesystem::path& path, std::string* header = nullptr);

 private:
  num::ParameterStore params_;
  int latent_dim_ = 0;
};

struct CodecReport {
  std::vector<double> epoch_loss;
  std::array<double, motion::kChannels> train_rmse{};
  std::array<double, motion::kChannels> heldout_rmse{};
  double train_rmse_all = 0;
  double heldout_rmse_all = 0;
  /// Mean relative L2 of encode(decode(z)) vs z over held-out codes.
  double latent_roundtrip = 0;
};

/// Per-channel reconstruction RMSE over normalized frames [B, 64, 8].
std::array<double, motion::kChannels> reconstruction_rmse(const Codec& codec,
                                                          const num::Tensor& frames,
                                                          double* overall = nullptr);

/// Trains on `train` ([B, 64, 8], normalized), reports on `heldout`. Does not
/// enforce gates.
Codec train_codec(const num::Tensor& train, const num::Tensor& heldout,
                  const CodecConfig& config, CodecReport* report = nullptr);

/// Throws kGateFailed when the reconstruction gates are not met.
void check_codec_gates(const CodecReport& report);

/// Stack normalized frames of `seqs` into [B, 64, 8].
num::Tensor stack_normalized(std::span<const motion::MotionSequence> seqs,
                             const motion::Normalization& norm);

}  // namespace smoodi
