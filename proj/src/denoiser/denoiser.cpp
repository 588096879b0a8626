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

#include "smoodi/denoiser.hpp"

#include "smoodi/error.hpp"
#include "smoodi/numerics/layers.hpp"

namespace smoodi {

using num::Bound;
using num::Tensor;
using num::Var;

Denoiser::Denoiser(const DenoiserConfig& config, num::Rng& rng) : config_(config) {
  require(config.latent_dim > 0 && config.d_model > 0 && config.blocks > 0 &&
              config.tokens > 0 && config.heads > 0 && config.d_model % config.heads == 0 &&
              config.d_model % 2 == 0 && config.timesteps > 0,
          ErrorCode::kConfig, "invalid denoiser configuration");
  const std::int64_t d = config.d_model;
  num::init_linear(params_, "in", config.latent_dim, config.tokens * d, rng);
  std::normal_distribution<float> nd(0.0f, 0.5f);
  Tensor pos({config.tokens, d}), table({kContentSlots, d});
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = nd(rng);
  for (std::size_t i = 0; i < table.size(); ++i) table[i] = nd(rng);
  params_.add("pos", std::move(pos));
  params_.add("content", std::move(table));
  num::init_linear(params_, "time.fc1", d, d, rng);
  num::init_linear(params_, "time.fc2", d, d, rng);
  for (int i = 0; i < config.blocks; ++i)
    num::init_encoder_block(params_, "block." + std::to_string(i), d, config.ffn, rng);
  num::init_layer_norm(params_, "out_ln", d);
  num::init_linear(params_, "out", d, config.latent_dim, rng);
}

void Denoiser::check_inputs(const num::Shape& z, std::span<const int> t,
                            std::span<const int> content) const {
  require(z.size() == 2 && z[1] == config_.latent_dim, ErrorCode::kShapeMismatch,
          "denoiser latent must be [B, " + std::to_string(config_.latent_dim) + "], got " +
              num::to_string(z));
  const auto b = static_cast<std::size_t>(z[0]);
  require(t.size() == b && content.size() == b, ErrorCode::kShapeMismatch,
          "denoiser timestep/content count must match the batch");
  for (int v : t)
    require(v >= 1 && v <= config_.timesteps, ErrorCode::kInvalidArgument,
            "timestep " + std::to_string(v) + " outside [1, " +
                std::to_string(config_.timesteps) + "]");
  for (int c : content)
    require(c >= 0 && c < kContentSlots, ErrorCode::kInvalidArgument,
            "content id " + std::to_string(c) + " outside [0, 6]");
}

Var Denoiser::embed(const Bound& p, Var z, std::span<const int> t,
                    std::span<const int> content) const {
  check_inputs(z.shape(), t, content);
  const std::int64_t b = z.shape()[0], d = config_.d_model;
  Var lat = num::add(num::reshape(num::linear(p, "in", z), {b, config_.tokens, d}), p["pos"]);
  Var te = p.tape().constant(num::sinusoidal_embedding(t, d));
  te = num::linear(p, "time.fc2", num::gelu(num::linear(p, "time.fc1", te)));
  Var cond = num::add(te, num::embedding(p["content"], content));
  const Var parts[] = {lat, num::reshape(cond, {b, 1, d})};
  return num::concat(parts, 1);
}

Var Denoiser::blocks(const Bound& p, Var x, const std::vector<Var>* residuals,
                     const std::string& prefix) const {
  if (residuals)
    require(residuals->size() == static_cast<std::size_t>(config_.blocks),
            ErrorCode::kShapeMismatch,
            "expected " + std::to_string(config_.blocks) + " residuals, got " +
                std::to_string(residuals->size()));
  for (int i = 0; i < config_.blocks; ++i) {
    if (residuals) {
      const Var& r = (*residuals)[static_cast<std::size_t>(i)];
      require(r.shape() == x.shape(), ErrorCode::kShapeMismatch,
              "residual " + std::to_string(i) + " has shape " + num::to_string(r.shape()));
      x = num::add(x, r);
    }
    x = num::encoder_block(p, prefix + "." + std::to_string(i), x, config_.heads);
  }
  return x;
}

Var Denoiser::head(const Bound& p, Var x) const {
  Var lat = num::slice(num::layer_norm(p, "out_ln", x), 1, 0, config_.tokens);
  return num::linear(p, "out", num::mean_axis(lat, 1));
}

Var Denoiser::predict(const Bound& p, Var z, std::span<const int> t,
                      std::span<const int> content, const std::vector<Var>* residuals) const {
  return head(p, blocks(p, embed(p, z, t, content), residuals));
}

Tensor Denoiser::predict_noise(const Tensor& z, std::span<const int> t,
                               std::span<const int> content,
                               const std::vector<Tensor>* residuals) const {
  num::Tape tape;
  Bound p(tape, params_, false);
  std::vector<Var> rs;
  if (residuals)
    for (const auto& r : *residuals) rs.push_back(tape.constant(r));
  return predict(p, tape.constant(z), t, content, residuals ? &rs : nullptr).value();
}

void Denoiser::save(const std::filesystem::path& path, const std::string& extra) const {
  std::string header = "denoiser v1 d_model=" + std::to_string(config_.d_model) +
                       " blocks=" + std::to_string(config_.blocks) +
                       " frozen_checksum=" + params_.checksum() +
                       " latent_dim=" + std::to_string(config_.latent_dim) +
                       " heads=" + std::to_string(config_.heads) +
                       " ffn=" + std::to_string(config_.ffn) +
                       " tokens=" + std::to_string(config_.tokens) +
                       " timesteps=" + std::to_string(config_.timesteps);
  if (!extra.empty()) header += " " + extra;
  num::save_checkpoint(path, header, params_);
}

Denoiser Denoiser::load(const std::filesystem::path& path, std::string* header) {
  num::Checkpoint ck = num::load_checkpoint(path);
  require(ck.header.rfind("denoiser v1 ", 0) == 0, ErrorCode::kFormat,
          path.string() + " is not a denoiser checkpoint");
  require(ck.params.checksum() == num::header_field(ck.header, "frozen_checksum"),
          ErrorCode::kChecksumMismatch,
          "denoiser parameters do not match the checksum recorded at freeze time");
  auto field = [&](const char* k) {
    const std::string v = num::header_field(ck.header, k);
    require(!v.empty(), ErrorCode::kFormat, std::string("denoiser header lacks ") + k);
    return std::stoi(v);
  };
  Denoiser d;
  d.config_ = {field("latent_dim"), field("d_model"), field("blocks"), field("heads"),
               field("ffn"),        field("tokens"),  field("timesteps")};
  d.params_ = std::move(ck.params);
  if (header) *header = ck.header;
  return d;
}

}  // namespace smoodi
