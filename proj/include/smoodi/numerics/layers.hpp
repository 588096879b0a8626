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

#include <string>

#include "smoodi/numerics/params.hpp"

namespace smoodi::num {

/// Parameters `<name>.w` [in, out] and `<name>.b` [out], uniform in
/// ±gain/sqrt(in). gain = 0 gives an exactly zero layer.
void init_linear(ParameterStore& ps, const std::string& name, std::int64_t in,
                 std::int64_t out, Rng& rng, float gain = 1.0f);
void init_layer_norm(ParameterStore& ps, const std::string& name,
                     std::int64_t dim);
/// Pre-norm Transformer encoder block: `<name>.ln1`, `.qkv`, `.proj`,
/// `.ln2`, `.ff1`, `.ff2`.
void init_encoder_block(ParameterStore& ps, const std::string& name,
                        std::int64_t d_model, std::int64_t ffn, Rng& rng);

Var linear(const Bound& p, const std::string& name, Var x);
Var layer_norm(const Bound& p, const std::string& name, Var x);

/// x[B, T, D] -> [B, T, D]:
///   h = x + Attn(LN1(x));  y = h + FF(LN2(h))
Var encoder_block(const Bound& p, const std::string& name, Var x, int heads);

/// Sequence encoder over non-overlapping patches of `patch` frames:
/// `<name>.patch` (patch*channels -> d_model), `<name>.pos`, one encoder
/// block `<name>.block`, `<name>.ln`. Output is the token mean, [B, d_model].
void init_patch_encoder(ParameterStore& ps, const std::string& name,
                        std::int64_t frames, std::int64_t channels,
                        std::int64_t patch, std::int64_t d_model,
                        std::int64_t ffn, Rng& rng);
Var patch_encoder(const Bound& p, const std::string& name, Var x,
                  std::int64_t patch, int heads);

/// Fixed sinusoidal encoding of integer timesteps, [n, dim].
Tensor sinusoidal_embedding(std::span<const int> timesteps, std::int64_t dim);

}  // namespace smoodi::num
