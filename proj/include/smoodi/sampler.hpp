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

// Guided DDIM sampling, DDIM inversion and inversion-based style transfer.
// Every call is a batch: one row per sample.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smoodi/guidance.hpp"
#include "smoodi/models.hpp"

namespace smoodi {

struct SampleRequest {
  std::vector<int> content;            ///< per row; kNullContent allowed
  std::optional<num::Tensor> style;    ///< normalized reference frames [B, 64, 8]
  GuidanceWeights weights;
  ClassifierGuidanceConfig guidance;
  int steps = 50;
  std::vector<std::uint64_t> seeds;    ///< per row, fixes z_T only
  std::optional<num::Tensor> z_T;      ///< overrides the seeds (inversion)
  /// false evaluates every branch on the base alone (residuals zeroed).
  bool use_adaptor = true;
  bool trace = false;
};

struct SampleOutput {
  num::Tensor z0;      ///< [B, d]
  num::Tensor frames;  ///< decoded, normalized [B, 64, 8]
  /// "step=<t> G=<val> eps_norm=<val>" per inference step when tracing.
  std::vector<std::string> trace;
  /// G between the decoded output and its reference, per row (styled runs).
  std::vector<double> g_final;
};

/// z_T rows drawn from N(0, I), one independent stream per seed.
num::Tensor initial_noise(std::span<const std::uint64_t> seeds, int latent_dim);

SampleOutput sample(const SampleRequest& request, const ModelSet& models);

/// The guided eps at one step, before classifier guidance. Exposed for the
/// equivalence and guidance tests.
num::Tensor guided_eps(const ModelSet& models, const num::Tensor& z, int t,
                       std::span<const int> content, const num::Tensor* style_embedding,
                       const GuidanceWeights& w, bool use_adaptor);

/// Runs the inverse recurrence from encode(frames) at t = 0 up to the top
/// inference step, with content-only guidance weight `w_c` (1 = the plain
/// conditional prediction) and no style machinery.
num::Tensor ddim_invert(const ModelSet& models, const num::Tensor& frames,
                        std::span<const int> content, int steps, float w_c = 1.0f);

struct TransferConfig {
  int steps = 30;
  GuidanceWeights weights{7.5f, 6.5f};
  ClassifierGuidanceConfig guidance{.tau = -0.4f};
  float inversion_w_c = 1.0f;
};

SampleOutput style_transfer(const ModelSet& models, const num::Tensor& content_frames,
                            std::span<const int> content, const num::Tensor& style_frames,
                            const TransferConfig& config = {});

}  // namespace smoodi
