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

#include <cmath>

#include "smoodi/denoiser.hpp"
#include "smoodi/error.hpp"

namespace smoodi {

using num::Tensor;

Denoiser train_base(const Tensor& latents, std::span<const int> content,
                    const NoiseSchedule& schedule, const DenoiserConfig& config,
                    const BaseTrainConfig& train, BaseTrainReport* report) {
  require(latents.rank() == 2 && latents.dim(1) == config.latent_dim, ErrorCode::kShapeMismatch,
          "base training latents must be [N, latent_dim]");
  require(static_cast<std::size_t>(latents.dim(0)) == content.size(), ErrorCode::kShapeMismatch,
          "one content label per latent expected");
  require(config.timesteps == schedule.timesteps(), ErrorCode::kConfig,
          "denoiser and schedule disagree on T");
  require(train.epochs > 0 && train.batch > 0 && train.content_dropout >= 0 &&
              train.content_dropout <= 1,
          ErrorCode::kConfig, "invalid base training configuration");

  num::Rng rng(train.seed);
  Denoiser model(config, rng);
  num::AdamW opt(model.mutable_params(), model.params().names(), {.lr = train.lr});
  const auto n = static_cast<std::size_t>(latents.dim(0));
  const auto d = static_cast<std::size_t>(config.latent_dim);
  const auto b = static_cast<std::size_t>(train.batch);
  const std::int64_t total = static_cast<std::int64_t>((n + b - 1) / b) * train.epochs;
  std::uniform_int_distribution<int> pick_t(1, schedule.timesteps());
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  std::normal_distribution<float> gauss(0.0f, 1.0f);

  BaseTrainReport rep;
  for (int epoch = 0; epoch < train.epochs; ++epoch) {
    double acc = 0;
    for (const auto& idx : num::shuffled_batches(n, b, rng)) {
      // All randomness for the batch is drawn up front, in a fixed order.
      std::vector<int> ts(idx.size()), cs(idx.size());
      Tensor eps({static_cast<std::int64_t>(idx.size()), config.latent_dim});
      for (std::size_t i = 0; i < idx.size(); ++i) {
        ts[i] = pick_t(rng);
        const bool drop = unit(rng) < train.content_dropout;
        cs[i] = drop ? kNullContent : content[static_cast<std::size_t>(idx[i])];
        for (std::size_t j = 0; j < d; ++j) eps[i * d + j] = gauss(rng);
      }
      const Tensor zt = add_noise(num::take_rows(latents, idx), eps, ts, schedule);

      opt.set_lr(num::cosine_lr(train.lr, opt.steps(), total));
      num::Tape tape;
      num::Bound p(tape, model.params(), true);
      num::Var loss = num::mse(model.predict(p, tape.constant(zt), ts, cs), tape.constant(eps));
      require(std::isfinite(loss.value().item()), ErrorCode::kNonFinite,
              "base denoiser loss became non-finite at epoch " + std::to_string(epoch));
      tape.backward(loss);
      opt.step(p.gradients());
      acc += static_cast<double>(loss.value().item()) * static_cast<double>(idx.size());
    }
    rep.epoch_loss.push_back(acc / static_cast<double>(n));
  }
  if (report) *report = std::move(rep);
  return model;
}

}  // namespace smoodi
