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

// Frame classifiers. The style oracle's penultimate activations are the
// feature map f used by classifier guidance and by the feature-space
// metrics; the content oracle backs CRA.
//
//   frames [B, 64, 8] -> patch encoder -> Linear -> GELU = f [B, 16]
//   f -> Linear -> logits

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "smoodi/numerics/params.hpp"

namespace smoodi {

enum class OracleKind { kStyle, kContent };

std::string_view name(OracleKind k);

struct OracleConfig {
  OracleKind kind = OracleKind::kStyle;
  int d_model = 64;
  int heads = 2;
  int ffn = 128;
  int patch = 4;
  int feature_dim = 16;
  int epochs = 40;
  int batch = 64;
  float lr = 1e-3f;
  std::uint64_t seed = 3;
};

class Oracle {
 public:
  Oracle() = default;
  Oracle(const OracleConfig& config, num::Rng& rng);

  const OracleConfig& config() const noexcept { return config_; }
  int classes() const noexcept;

  /// f(x) for normalized frames [B, 64, 8] -> [B, feature_dim].
  num::Var features(const num::Bound& p, num::Var frames) const;
  /// The final linear layer alone.
  num::Var head(const num::Bound& p, num::Var features) const;
  num::Var logits(const num::Bound& p, num::Var frames) const;

  num::Tensor features(const num::Tensor& frames) const;
  num::Tensor logits(const num::Tensor& frames) const;
  std::vector<int> classify(const num::Tensor& frames) const;

  const num::ParameterStore& params() const noexcept { return params_; }
  num::ParameterStore& mutable_params() noexcept { return params_; }

  /// Header "oracle v1 kind=<style|content> seed=<u64>" plus the frozen
  /// checksum and `extra` tokens.
  void save(const std::filesystem::path& path, const std::string& extra = {}) const;
  static Oracle load(const std::filesystem::path& path, std::string* header = nullptr);

 private:
  OracleConfig config_;
  num::ParameterStore params_;
};

/// Index of the largest value per row of [B, C].
std::vector<int> argmax_rows(const num::Tensor& logits);

struct OracleReport {
  std::vector<double> epoch_loss;
  double train_accuracy = 0;
  double heldout_accuracy = 0;
};

/// Trains on normalized frames [N, 64, 8] with integer labels. A seeded 80/20
/// split provides the held-out accuracy.
Oracle train_oracle(const num::Tensor& frames, std::span<const int> labels,
                    const OracleConfig& config, OracleReport* report = nullptr);

double accuracy(const Oracle& oracle, const num::Tensor& frames, std::span<const int> labels);

}  // namespace smoodi
