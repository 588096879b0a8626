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

#include "smoodi/adaptor.hpp"

#include "smoodi/error.hpp"
#include "smoodi/motion.hpp"
#include "smoodi/numerics/layers.hpp"

namespace smoodi {

using num::Bound;
using num::Tensor;
using num::Var;

Adaptor::Adaptor(const Denoiser& base, const AdaptorConfig& config, num::Rng& rng)
    : config_(config), base_config_(base.config()), base_checksum_(base.params().checksum()) {
  const auto& bc = base.config();
  num::init_patch_encoder(params_, "style", motion::kFrames, motion::kChannels, config.patch,
                          bc.d_model, bc.ffn, rng);
  for (int i = 0; i < bc.blocks; ++i) {
    const std::string k = std::to_string(i);
    params_.copy_prefixed(base.params(), "block." + k + ".", "copy." + k + ".");
    num::init_linear(params_, "link." + k, bc.d_model, bc.d_model, rng, 0.0f);
  }
}

Var Adaptor::encode_style(const Bound& p, Var frames) const {
  return num::patch_encoder(p, "style", frames, config_.patch, base_config_.heads);
}

Tensor Adaptor::encode_style(const Tensor& frames) const {
  num::Tape t;
  Bound p(t, params_, false);
  return encode_style(p, t.constant(frames)).value();
}

Tensor Adaptor::null_style() const {
  return encode_style(Tensor({1, motion::kFrames, motion::kChannels}));
}

std::vector<Var> Adaptor::residuals(const Bound& p, Var tokens, Var style) const {
  const num::Shape& ts = tokens.shape();
  require(ts.size() == 3 && ts[2] == base_config_.d_model, ErrorCode::kShapeMismatch,
          "adaptor tokens must be [B, T, d_model]");
  require(style.shape() == num::Shape{ts[0], ts[2]}, ErrorCode::kShapeMismatch,
          "style embedding must be [B, d_model], got " + num::to_string(style.shape()));
  // Broadcast the style embedding over the token axis.
  Var s = num::reshape(style, {ts[0], 1, ts[2]});
  std::vector<Var> copies(static_cast<std::size_t>(ts[1]), s);
  Var h = num::add(tokens, num::concat(copies, 1));
  std::vector<Var> out;
  for (int i = 0; i < base_config_.blocks; ++i) {
    const std::string k = std::to_string(i);
    h = num::encoder_block(p, "copy." + k, h, base_config_.heads);
    out.push_back(num::linear(p, "link." + k, h));
  }
  return out;
}

void Adaptor::save(const std::filesystem::path& path, const std::string& extra) const {
  std::string header = "adaptor v1 base_checksum=" + base_checksum_ +
                       " checksum=" + params_.checksum() +
                       " patch=" + std::to_string(config_.patch);
  if (!extra.empty()) header += " " + extra;
  num::save_checkpoint(path, header, params_);
}

Adaptor Adaptor::load(const std::filesystem::path& path, const Denoiser& base,
                      std::string* header) {
  num::Checkpoint ck = num::load_checkpoint(path);
  require(ck.header.rfind("adaptor v1 ", 0) == 0, ErrorCode::kFormat,
          path.string() + " is not an adaptor checkpoint");
  const std::string bound = num::header_field(ck.header, "base_checksum");
  require(bound == base.params().checksum(), ErrorCode::kChecksumMismatch,
          "adaptor was trained against base " + bound + " but the loaded base is " +
              base.params().checksum());
  require(ck.params.checksum() == num::header_field(ck.header, "checksum"),
          ErrorCode::kChecksumMismatch, "adaptor parameters do not match their checksum");
  Adaptor a;
  a.config_.patch = std::stoi(num::header_field(ck.header, "patch"));
  a.base_config_ = base.config();
  a.base_checksum_ = bound;
  a.params_ = std::move(ck.params);
  if (header) *header = ck.header;
  return a;
}

Var stylized_predict(const Denoiser& base, const Bound& base_p, const Adaptor& adaptor,
                     const Bound& adaptor_p, Var z, std::span<const int> t,
                     std::span<const int> content, Var style) {
  Var tokens = base.embed(base_p, z, t, content);
  const auto rs = adaptor.residuals(adaptor_p, tokens, style);
  return base.head(base_p, base.blocks(base_p, tokens, &rs));
}

}  // namespace smoodi
