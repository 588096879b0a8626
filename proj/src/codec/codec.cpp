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

#include "smoodi/codec.hpp"

#include <cmath>

#include "smoodi/error.hpp"
#include "smoodi/numerics/layers.hpp"

namespace smoodi {

using num::Bound;
using num::Tensor;
using num::Var;

namespace {

constexpr std::int64_t kFlat = motion::kFrames * motion::kChannels;

}  // namespace

Codec::Codec(const CodecConfig& config, num::Rng& rng) : latent_dim_(config.latent_dim) {
  require(config.latent_dim > 0 && config.hidden > 0, ErrorCode::kConfig,
          "codec dimensions must be positive");
  num::init_linear(params_, "enc.fc1", kFlat, config.hidden, rng);
  num::init_linear(params_, "enc.fc2", config.hidden, config.latent_dim, rng);
  num::init_linear(params_, "dec.fc1", config.latent_dim, config.hidden, rng);
  num::init_linear(params_, "dec.fc2", config.hidden, kFlat, rng);
  params_.add("latent.mean", Tensor::zeros({config.latent_dim}));
  params_.add("latent.std", Tensor::full({config.latent_dim}, 1.0f));
}

std::vector<std::string> Codec::trainable_names() const {
  std::vector<std::string> out;
  for (const auto& n : params_.names())
    if (n.rfind("latent.", 0) != 0) out.push_back(n);
  return out;
}

Var Codec::encode(const Bound& p, Var frames) const {
  const std::int64_t b = frames.shape().at(0);
  require(num::numel(frames.shape()) == b * kFlat, ErrorCode::kShapeMismatch,
          "codec input must be [B, 64, 8], got " + num::to_string(frames.shape()));
  Var x = num::reshape(frames, {b, kFlat});
  Var h = num::linear(p, "enc.fc2", num::gelu(num::linear(p, "enc.fc1", x)));
  // Standardize: (h - mean) / std, with 1/std applied as a product.
  Tensor inv = p.tape().value(p["latent.std"]);
  for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0f / inv[i];
  return num::mul(num::sub(h, p["latent.mean"]), p.tape().constant(std::move(inv)));
}

Var Codec::decode(const Bound& p, Var z) const {
  require(z.shape().size() == 2 && z.shape()[1] == latent_dim_, ErrorCode::kShapeMismatch,
          "codec latent must be [B, " + std::to_string(latent_dim_) + "], got " +
              num::to_string(z.shape()));
  Var h = num::add(num::mul(z, p["latent.std"]), p["latent.mean"]);
  Var y = num::linear(p, "dec.fc2", num::gelu(num::linear(p, "dec.fc1", h)));
  return num::reshape(y, {z.shape()[0], motion::kFrames, motion::kChannels});
}

Tensor Codec::encode(const Tensor& frames) const {
  num::Tape t;
  Bound p(t, params_, false);
  return encode(p, t.constant(frames)).value();
}

Tensor Codec::decode(const Tensor& z) const {
  num::Tape t;
  Bound p(t, params_, false);
  return decode(p, t.constant(z)).value();
}

void Codec::save(const std::filesystem::path& path, const std::string& extra) const {
  std::string header = "codec v1 d=" + std::to_string(latent_dim_) +
                       " N=" + std::to_string(motion::kFrames) +
                       " H=" + std::to_string(motion::kChannels) +
                       " frozen_checksum=" + params_.checksum();
  if (!extra.empty()) header += " " + extra;
  num::save_checkpoint(path, header, params_);
}

Codec Codec::load(const std::filesystem::path& path, std::string* header) {
  num::Checkpoint ck = num::load_checkpoint(path);
  require(ck.header.rfind("codec v1 ", 0) == 0, ErrorCode::kFormat,
          path.string() + " is not a codec checkpoint");
  require(num::header_field(ck.header, "N") == std::to_string(motion::kFrames) &&
              num::header_field(ck.header, "H") == std::to_string(motion::kChannels),
          ErrorCode::kFormat, "codec frame geometry mismatch");
  require(ck.params.checksum() == num::header_field(ck.header, "frozen_checksum"),
          ErrorCode::kChecksumMismatch,
          "codec parameters do not match the checksum recorded at freeze time");
  Codec c;
  c.latent_dim_ = std::stoi(num::header_field(ck.header, "d"));
  require(ck.params.get("latent.mean").size() == static_cast<std::size_t>(c.latent_dim_),
          ErrorCode::kFormat, "codec latent dimension mismatch");
  c.params_ = std::move(ck.params);
  if (header) *header = ck.header;
  return c;
}

std::array<double, motion::kChannels> reconstruction_rmse(const Codec& codec,
                                                          const Tensor& frames,
                                                          double* overall) {
  const Tensor rec = codec.decode(codec.encode(frames));
  std::array<double, motion::kChannels> se{};
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const double d = static_cast<double>(rec[i]) - frames[i];
    se[i % motion::kChannels] += d * d;
  }
  const double per = static_cast<double>(frames.size() / motion::kChannels);
  double all = 0;
  for (auto& v : se) {
    all += v;
    v = std::sqrt(v / per);
  }
  if (overall) *overall = std::sqrt(all / static_cast<double>(frames.size()));
  return se;
}

Codec train_codec(const Tensor& train, const Tensor& heldout, const CodecConfig& config,
                  CodecReport* report) {
  require(train.rank() == 3 && train.dim(1) == motion::kFrames &&
              train.dim(2) == motion::kChannels,
          ErrorCode::kShapeMismatch, "codec training data must be [B, 64, 8]");
  require(config.epochs > 0 && config.batch > 0, ErrorCode::kConfig,
          "codec epochs and batch must be positive");
  num::Rng rng(config.seed);
  Codec codec(config, rng);
  num::AdamW opt(codec.mutable_params(), codec.trainable_names(),
                 {.lr = config.lr, .weight_decay = 0.01f});
  const auto n = static_cast<std::size_t>(train.dim(0));
  const std::int64_t per_epoch =
      static_cast<std::int64_t>((n + static_cast<std::size_t>(config.batch) - 1) /
                                static_cast<std::size_t>(config.batch));
  const std::int64_t total = per_epoch * config.epochs;
  CodecReport rep;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double acc = 0;
    std::size_t seen = 0;
    for (const auto& idx : num::shuffled_batches(n, static_cast<std::size_t>(config.batch), rng)) {
      opt.set_lr(num::cosine_lr(config.lr, opt.steps(), total, 0.01f));
      num::Tape t;
      Bound p(t, codec.params(), true);
      Var x = t.constant(num::take_rows(train, idx));
      Var loss = num::mse(codec.decode(p, codec.encode(p, x)), x);
      require(std::isfinite(loss.value().item()), ErrorCode::kNonFinite,
              "codec loss became non-finite at epoch " + std::to_string(epoch));
      t.backward(loss);
      opt.step(p.gradients());
      acc += static_cast<double>(loss.value().item()) * static_cast<double>(idx.size());
      seen += idx.size();
    }
    rep.epoch_loss.push_back(acc / static_cast<double>(seen));
  }

  // Standardize the latent with statistics of the training codes.
  const Tensor codes = codec.encode(train);
  const auto d = static_cast<std::size_t>(config.latent_dim);
  Tensor& mu = codec.mutable_params().mutable_get("latent.mean");
  Tensor& sd = codec.mutable_params().mutable_get("latent.std");
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0, s2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = codes[i * d + j];
      s += v;
      s2 += v * v;
    }
    const double m = s / static_cast<double>(n);
    mu[j] = static_cast<float>(m);
    sd[j] = static_cast<float>(std::max(std::sqrt(std::max(s2 / static_cast<double>(n) - m * m, 0.0)), 1e-4));
  }

  rep.train_rmse = reconstruction_rmse(codec, train, &rep.train_rmse_all);
  if (!heldout.empty()) {
    rep.heldout_rmse = reconstruction_rmse(codec, heldout, &rep.heldout_rmse_all);
    const Tensor z = codec.encode(heldout);
    const Tensor z2 = codec.encode(codec.decode(z));
    double rel = 0;
    const auto b = static_cast<std::size_t>(z.dim(0));
    for (std::size_t i = 0; i < b; ++i) {
      double num = 0, den = 0;
      for (std::size_t j = 0; j < d; ++j) {
        const double a = z[i * d + j], c = z2[i * d + j];
        num += (a - c) * (a - c);
        den += a * a;
      }
      rel += std::sqrt(num / std::max(den, 1e-12));
    }
    rep.latent_roundtrip = rel / static_cast<double>(b);
  }
  if (report) *report = std::move(rep);
  return codec;
}

void check_codec_gates(const CodecReport& r) {
  for (int c = 0; c < motion::kChannels; ++c)
    require(r.heldout_rmse[c] <= 0.15, ErrorCode::kGateFailed,
            "codec gate: held-out RMSE on channel " +
                std::string(motion::channel_names()[c]) + " is " +
                std::to_string(r.heldout_rmse[c]) + " > 0.15");
  require(r.heldout_rmse_all <= 1.5 * r.train_rmse_all, ErrorCode::kGateFailed,
          "codec gate: held-out RMSE exceeds 1.5x training RMSE");
  require(r.latent_roundtrip <= 0.1, ErrorCode::kGateFailed,
          "codec gate: latent round trip relative error " + std::to_string(r.latent_roundtrip) +
              " > 0.1");
}

Tensor stack_normalized(std::span<const motion::MotionSequence> seqs,
                        const motion::Normalization& norm) {
  require(!seqs.empty(), ErrorCode::kInvalidArgument, "no sequences");
  Tensor out({static_cast<std::int64_t>(seqs.size()), motion::kFrames, motion::kChannels});
  const std::size_t row = static_cast<std::size_t>(kFlat);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const Tensor z = norm.normalize(seqs[i].frames);
    std::copy_n(z.raw(), row, out.raw() + i * row);
  }
  return out;
}

}  // namespace smoodi
