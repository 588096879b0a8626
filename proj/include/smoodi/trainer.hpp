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

// Adaptor fine-tuning: L_all = L_std + lambda_pr L_pr + lambda_cyc L_cyc.
// Only adaptor parameters reach the optimizer; codec and base stay frozen.

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "smoodi/adaptor.hpp"
#include "smoodi/codec.hpp"
#include "smoodi/motion.hpp"

namespace smoodi {

struct TrainerConfig {
  float lambda_pr = 1.0f;
  float lambda_cyc = 0.5f;
  float lr = 1e-3f;
  int batch = 64;
  int epochs = 100;
  float content_dropout = 0.1f;
  float style_mask = 0.1f;
  std::uint64_t seed = 4;

  void validate() const;
};

/// Styled or prior items: latent, noise, timestep, condition, reference.
struct ItemBatch {
  num::Tensor z_t;    ///< [n, d]
  num::Tensor eps;    ///< [n, d]
  num::Tensor style;  ///< normalized reference frames [n, 64, 8]; zeros = masked
  std::vector<int> t;
  std::vector<int> content;  ///< may hold kNullContent after dropout
};

/// Cycle items. With c the B content and c' the A content:
///   s_hs = (c', B style), s_sh = (c, neutral),
///   z_sh_t = noised encode(s_sh) with eps, z_hs_t = noised encode(s_hs) with eps2.
struct CycleBatch {
  num::Tensor z_sh_t, z_hs_t;
  num::Tensor eps, eps2;
  num::Tensor s_hs, s_sh;
  std::vector<int> t;
  std::vector<int> content_b;  ///< c
  std::vector<int> content_a;  ///< c'
};

struct TrainingBatch {
  ItemBatch styled;  ///< from corpus B, s = x
  ItemBatch prior;   ///< from corpus A, s' = x'
  CycleBatch cycle;
};

/// Corpora in raw units plus the shared normalization.
struct TrainingData {
  motion::Normalization norm;
  std::vector<motion::MotionSequence> a;
  std::vector<motion::MotionSequence> b;
};

/// Builds one batch from B rows `b_rows` and A rows `a_rows` (equal counts).
/// Draw order from `rng` is fixed: styled items, prior items, cycle items.
TrainingBatch make_batch(const TrainingData& data, std::span<const std::int64_t> b_rows,
                         std::span<const std::int64_t> a_rows, const Codec& codec,
                         const NoiseSchedule& schedule, const TrainerConfig& cfg,
                         num::Rng& rng);

/// mean ||eps_theta(z_t, t, c, s) - eps||^2 per element, adaptor active.
num::Var item_loss(const Denoiser& base, const num::Bound& base_p, const Adaptor& adaptor,
                   const num::Bound& adaptor_p, const ItemBatch& items);
num::Var loss_std(const Denoiser& base, const num::Bound& base_p, const Adaptor& adaptor,
                  const num::Bound& adaptor_p, const TrainingBatch& batch);
num::Var loss_pr(const Denoiser& base, const num::Bound& base_p, const Adaptor& adaptor,
                 const num::Bound& adaptor_p, const TrainingBatch& batch);
/// mean over elements of (eps(z_sh_t, t, c, s_hs) + eps(z_hs_t, t, c', s_sh) - eps - eps2)^2.
num::Var loss_cyc(const Denoiser& base, const num::Bound& base_p, const Adaptor& adaptor,
                  const num::Bound& adaptor_p, const TrainingBatch& batch);

struct LossTerms {
  num::Var std_, pr, cyc, all;
};
LossTerms adaptor_losses(const Denoiser& base, const num::Bound& base_p, const Adaptor& adaptor,
                         const num::Bound& adaptor_p, const TrainingBatch& batch,
                         const TrainerConfig& cfg);

struct EpochLosses {
  double std_ = 0, pr = 0, cyc = 0, all = 0;
};

struct AdaptorTrainReport {
  std::vector<EpochLosses> epochs;
  std::string base_checksum_before, base_checksum_after;
};

/// CSV "epoch,loss_std,loss_pr,loss_cyc,loss_all".
void write_loss_csv(const std::filesystem::path& path, const AdaptorTrainReport& report);

/// Called after every epoch with the current adaptor (for checkpoints).
using EpochCallback = std::function<void(int epoch, const Adaptor&)>;

/// A non-finite loss aborts with kNonFinite; the adaptor passed to the last
/// callback is the last good state.
Adaptor train_adaptor(const TrainingData& data, const Codec& codec, const Denoiser& base,
                      const NoiseSchedule& schedule, const TrainerConfig& cfg,
                      AdaptorTrainReport* report = nullptr,
                      const EpochCallback& on_epoch = {});

}  // namespace smoodi
