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

#include "smoodi/numerics/layers.hpp"

#include <cmath>

#include "smoodi/error.hpp"

namespace smoodi::num {

void init_linear(ParameterStore& ps, const std::string& name, std::int64_t in,
                 std::int64_t out, Rng& rng, float gain) {
  Tensor w({in, out});
  const float bound = gain / std::sqrt(static_cast<float>(in));
  std::uniform_real_distribution<float> u(-bound, bound);
  if (gain != 0.0f)
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = u(rng);
  ps.add(name + ".w", std::move(w));
  ps.add(name + ".b", Tensor::zeros({out}));
}

void init_layer_norm(ParameterStore& ps, const std::string& name,
                     std::int64_t dim) {
  ps.add(name + ".g", Tensor::full({dim}, 1.0f));
  ps.add(name + ".b", Tensor::zeros({dim}));
}

void init_encoder_block(ParameterStore& ps, const std::string& name,
                        std::int64_t d_model, std::int64_t ffn, Rng& rng) {
  init_layer_norm(ps, name + ".ln1", d_model);
  init_linear(ps, name + ".qkv", d_model, 3 * d_model, rng);
  init_linear(ps, name + ".proj", d_model, d_model, rng);
  init_layer_norm(ps, name + ".ln2", d_model);
  init_linear(ps, name + ".ff1", d_model, ffn, rng);
  init_linear(ps, name + ".ff2", ffn, d_model, rng);
}

Var linear(const Bound& p, const std::string& name, Var x) {
  return add(matmul(x, p[name + ".w"]), p[name + ".b"]);
}

Var layer_norm(const Bound& p, const std::string& name, Var x) {
  return layer_norm(x, p[name + ".g"], p[name + ".b"]);
}

Var encoder_block(const Bound& p, const std::string& name, Var x, int heads) {
  const Shape& xs = x.shape();
  require(xs.size() == 3, ErrorCode::kShapeMismatch,
          "encoder_block expects [B, T, D], got " + to_string(xs));
  const std::int64_t b = xs[0], t = xs[1], d = xs[2];
  require(heads > 0 && d % heads == 0, ErrorCode::kShapeMismatch,
          "d_model not divisible by head count");
  const std::int64_t dh = d / heads;

  Var qkv = linear(p, name + ".qkv", layer_norm(p, name + ".ln1", x));
  static constexpr std::size_t kToHeads[] = {0, 2, 1, 3};
  auto split = [&](std::int64_t part) {
    Var s = slice(qkv, 2, part * d, d);
    return permute(reshape(s, {b, t, heads, dh}), kToHeads);
  };
  Var q = split(0), k = split(1), v = split(2);
  Var att = softmax(scale(bmm(q, k, true), 1.0f / std::sqrt(static_cast<float>(dh))));
  Var ctx = reshape(permute(bmm(att, v), kToHeads), {b, t, d});
  Var h = add(x, linear(p, name + ".proj", ctx));
  Var ff = linear(p, name + ".ff2",
                  gelu(linear(p, name + ".ff1", layer_norm(p, name + ".ln2", h))));
  return add(h, ff);
}

void init_patch_encoder(ParameterStore& ps, const std::string& name,
                        std::int64_t frames, std::int64_t channels,
                        std::int64_t patch, std::int64_t d_model,
                        std::int64_t ffn, Rng& rng) {
  require(patch > 0 && frames % patch == 0, ErrorCode::kConfig,
          "patch length must divide the frame count");
  init_linear(ps, name + ".patch", patch * channels, d_model, rng);
  std::normal_distribution<float> nd(0.0f, 0.5f);
  Tensor pos({frames / patch, d_model});
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = nd(rng);
  ps.add(name + ".pos", std::move(pos));
  init_encoder_block(ps, name + ".block", d_model, ffn, rng);
  init_layer_norm(ps, name + ".ln", d_model);
}

Var patch_encoder(const Bound& p, const std::string& name, Var x,
                  std::int64_t patch, int heads) {
  const Shape& s = x.shape();
  require(s.size() == 3 && s[1] % patch == 0, ErrorCode::kShapeMismatch,
          "patch encoder expects [B, frames, channels], got " + to_string(s));
  Var tok = reshape(x, {s[0], s[1] / patch, patch * s[2]});
  tok = add(linear(p, name + ".patch", tok), p[name + ".pos"]);
  tok = encoder_block(p, name + ".block", tok, heads);
  return mean_axis(layer_norm(p, name + ".ln", tok), 1);
}

Tensor sinusoidal_embedding(std::span<const int> timesteps, std::int64_t dim) {
  require(dim % 2 == 0, ErrorCode::kInvalidArgument,
          "sinusoidal embedding dimension must be even");
  const auto n = static_cast<std::int64_t>(timesteps.size());
  Tensor out({n, dim});
  const std::int64_t half = dim / 2;
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < half; ++j) {
      const double freq = std::exp(-std::log(10000.0) * static_cast<double>(j) /
                                   static_cast<double>(half));
      const double a = static_cast<double>(timesteps[i]) * freq;
      out[i * dim + j] = static_cast<float>(std::sin(a));
      out[i * dim + half + j] = static_cast<float>(std::cos(a));
    }
  return out;
}

}  // namespace smoodi::num
