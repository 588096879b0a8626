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

// Style adaptor: a style encoder, a trainable copy of the base blocks
// ("copy.<i>") and one zero-initialized link per block ("link.<i>").
//
//   h_0 = base.embed(z_t, t, c) + style_embedding   (added to every token)
//   h_{i+1} = copy_block_i(h_i);  r_i = link_i(h_{i+1})
//
// r_i is added to the input of base block i.

#include <filesystem>
#include <string>
#include <vector>

#include "smoodi/denoiser.hpp"

namespace smoodi {

struct AdaptorConfig {
  int patch = 4;
};

class Adaptor {
 public:
  Adaptor() = default;
  Adaptor(const Denoiser& base, const AdaptorConfig& config, num::Rng& rng);

  /// Normalized frames [B, 64, 8] -> [B, d_model].
  num::Var encode_style(const num::Bound& p, num::Var frames) const;
  num::Tensor encode_style(const num::Tensor& frames) const;
  /// Embedding of an all-zero (fully masked) style sequence, [1, d_model].
  num::Tensor null_style() const;

  /// One residual per base block, each shaped like `tokens`.
  std::vector<num::Var> residuals(const num::Bound& p, num::Var tokens,
                                  num::Var style) const;

  const num::ParameterStore& params() const noexcept { return params_; }
  num::ParameterStore& mutable_params() noexcept { return params_; }
  const std::string& base_checksum() const noexcept { return base_checksum_; }
  int blocks() const noexcept { return base_config_.blocks; }

  /// Header "adaptor v1 base_checksum=<hex>" plus `extra` tokens.
  void save(const std::filesystem::path& path, const std::string& extra = {}) const;
  /// Fails with kChecksumMismatch unless `base` is the exact base the
  /// adaptor was trained against.
  static Adaptor load(const std::filesystem::path& path, const Denoiser& base,
                      std::string* header = nullptr);

 private:
  AdaptorConfig config_;
  DenoiserConfig base_config_;
  std::string base_checksum_;
  num::ParameterStore params_;
};

/// eps(z_t, t, c, s) with the adaptor's residuals injected into the base.
/// `style` is [B, d_model] (an embedding, possibly the null one).
num::Var stylized_predict(const Denoiser& base, const num::Bound& base_p,
                          const Adaptor& adaptor, const num::Bound& adaptor_p,
                          num::Var z, std::span<const int> t,
                          std::span<const int> content, num::Var style);

}  // namespace smoodi
