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

#include "smoodi/trainer.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "smoodi/error.hpp"

namespace smoodi {

using num::Bound;
using num::Tensor;
using num::Var;

void TrainerConfig::validate() const {
  require(lambda_pr >= 0 && lambda_cyc >= 0, ErrorCode::kConfig, "lambdas must be >= 0");
  require(content_dropout >= 0 && content_dropout <= 1 && style_mask >= 0 && style_mask <= 1,
          ErrorCode::kConfig, "dropout probabilities must lie in [0, 1]");
  require(lr > 0 && batch > 0 && epochs >= 0, ErrorCode::kConfig,
          "lr and batch must be positive, epochs non-negative");
}

namespace {

Tensor normal_rows(std::size_t n, int d, num::Rng& rng) {
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  Tensor out({static_cast<std::int64_t>(n), d});
  for (auto& v : out.mutable_data()) v = gauss(rng);
  return out;
}

std::vector<int> uniform_t(std::size_t n, const NoiseSchedule& s, num::Rng& rng) {
  std::uniform_int_distribution<int> pick(1, s.timesteps());
  std::vector<int> t(n);
  for (auto& x : t) x = pick(rng);
  return t;
}

ItemBatch make_items(const std::vector<motion::MotionSequence>& seqs,
                     std::span<const std::int64_t> rows, const motion::Normalization& norm,
                     const Codec& codec, const NoiseSchedule& s, const TrainerConfig& cfg,
                     num::Rng& rng) {
  std::vector<motion::MotionSequence> picked;
  for (auto r : rows) picked.push_back(seqs.at(static_cast<std::size_t>(r)));
  ItemBatch it;
  it.style = stack_normalized(picked, norm);
  const Tensor z0 = codec.encode(it.style);
  it.t = uniform_t(rows.size(), s, rng);
  it.eps = normal_rows(rows.size(), codec.latent_dim(), rng);
  it.z_t = add_noise(z0, it.eps, it.t, s);
  std::bernoulli_distribution drop(cfg.content_dropout), mask(cfg.style_mask);
  const std::size_t frame = static_cast<std::size_t>(motion::kFrames * motion::kChannels);
  for (std::size_t i = 0; i < picked.size(); ++i) {
    it.content.push_back(drop(rng) ? kNullContent : static_cast<int>(picked[i].content));
    if (mask(rng)) std::fill_n(it.style.raw() + i * frame, frame, 0.0f);
  }
  return it;
}

}  // namespace

TrainingBatch make_batch(const TrainingData& data, std::span<const std::int64_t> b_rows,
                         std::span<const std::int64_t> a_rows, const Codec& codec,
                         const NoiseSchedule& schedule, const TrainerConfig& cfg,
                         num::Rng& rng) {
  require(!b_rows.empty() && b_rows.size() == a_rows.size(), ErrorCode::kInvalidArgument,
          "batch needs equal, non-zero A and B row counts");
  TrainingBatch batch;
  batch.styled = make_items(data.b, b_rows, data.norm, codec, schedule, cfg, rng);
  batch.prior = make_items(data.a, a_rows, data.norm, codec, schedule, cfg, rng);

  // Cycle items come from exact cross-combinations of the paired items.
  const std::size_t n = b_rows.size();
  CycleBatch& cy = batch.cycle;
  std::vector<motion::MotionSequence> hs, sh;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& xb = data.b.at(static_cast<std::size_t>(b_rows[i]));
    const auto& xa = data.a.at(static_cast<std::size_t>(a_rows[i]));
    cy.content_b.push_back(static_cast<int>(xb.content));
    cy.content_a.push_back(static_cast<int>(xa.content));
    const std::uint64_t s1 = rng(), s2 = rng();
    hs.push_back(motion::cross_synthesize(xa.content, xb.style, s1));
    sh.push_back(motion::cross_synthesize(xb.content, motion::Style::kNeutral, s2));
  }
  cy.s_hs = stack_normalized(hs, data.norm);
  cy.s_sh = stack_normalized(sh, data.norm);
  cy.t = uniform_t(n, schedule, rng);
  cy.eps = normal_rows(n, codec.latent_dim(), rng);
  cy.eps2 = normal_rows(n, codec.latent_dim(), rng);
  cy.z_sh_t = add_noise(codec.encode(cy.s_sh), cy.eps, cy.t, schedule);
  cy.z_hs_t = add_noise(codec.encode(cy.s_hs), cy.eps2, cy.t, schedule);
  return batch;
}

namespace {

Var predict(const Denoiser& base, const Bound& bp, const Adaptor& adaptor, const Bound& ap,
            const Tensor& z, std::span<const int> t, std::span<const int> content,
            const Tensor& style) {
  num::Tape& tape = bp.tape();
  Var emb = adaptor.encode_style(ap, tape.constant(style));
  return stylized_predict(base, bp, adaptor, ap, tape.constant(z), t, content, emb);
}

}  // namespace

Var item_loss(const Denoiser& base, const Bound& bp, const Adaptor& adaptor, const Bound& ap,
              const ItemBatch& it) {
  Var pred = predict(base, bp, adaptor, ap, it.z_t, it.t, it.content, it.style);
  return num::mse(pred, bp.tape().constant(it.eps));
}

Var loss_std(const Denoiser& base, const Bound& bp, const Adaptor& adaptor, const Bound& ap,
             const TrainingBatch& batch) {
  return item_loss(base, bp, adaptor, ap, batch.styled);
}

Var loss_pr(const Denoiser& base, const Bound& bp, const Adaptor& adaptor, const Bound& ap,
            const TrainingBatch& batch) {
  return item_loss(base, bp, adaptor, ap, batch.prior);
}

Var loss_cyc(const Denoiser& base, const Bound& bp, const Adaptor& adaptor, const Bound& ap,
             const TrainingBatch& batch) {
  const CycleBatch& cy = batch.cycle;
  Var a = predict(base, bp, adaptor, ap, cy.z_sh_t, cy.t, cy.content_b, cy.s_hs);
  Var b = predict(base, bp, adaptor, ap, cy.z_hs_t, cy.t, cy.content_a, cy.s_sh);
  Tensor target(cy.eps.shape());
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = cy.eps[i] + cy.eps2[i];
  return num::mse(a + b, bp.tape().constant(target));
}

LossTerms adaptor_losses(const Denoiser& base, const Bound& bp, const Adaptor& adaptor,
                         const Bound& ap, const TrainingBatch& batch, const TrainerConfig& cfg) {
  LossTerms l;
  l.std_ = loss_std(base, bp, adaptor, ap, batch);
  l.pr = loss_pr(base, bp, adaptor, ap, batch);
  l.cyc = loss_cyc(base, bp, adaptor, ap, batch);
  l.all = l.std_ + cfg.lambda_pr * l.pr + cfg.lambda_cyc * l.cyc;
  return l;
}

void write_loss_csv(const std::filesystem::path& path, const AdaptorTrainReport& report) {
  std::ofstream os(path);
  require(os.good(), ErrorCode::kIo, "cannot write " + path.string());
  os << "epoch,loss_std,loss_pr,loss_cyc,loss_all\n";
  os.precision(9);
  for (std::size_t e = 0; e < report.epochs.size(); ++e) {
    const auto& l = report.epochs[e];
    os << e << ',' << l.std_ << ',' << l.pr << ',' << l.cyc << ',' << l.all << '\n';
  }
  require(os.good(), ErrorCode::kIo, "failed writing " + path.string());
}

Adaptor train_adaptor(const TrainingData& data, const Codec& codec, const Denoiser& base,
                      const NoiseSchedule& schedule, const TrainerConfig& cfg,
                      AdaptorTrainReport* report, const EpochCallback& on_epoch) {
  cfg.validate();
  require(!data.a.empty() && !data.b.empty(), ErrorCode::kInvalidArgument,
          "adaptor training needs both corpora");
  AdaptorTrainReport rep;
  rep.base_checksum_before = base.params().checksum();

  num::Rng rng(cfg.seed);
  Adaptor adaptor(base, AdaptorConfig{}, rng);
  num::AdamW opt(adaptor.mutable_params(), adaptor.params().names(), {.lr = cfg.lr});
  const auto bsz = static_cast<std::size_t>(cfg.batch);
  const std::size_t per_epoch = (data.b.size() + bsz - 1) / bsz;
  const auto total = static_cast<std::int64_t>(per_epoch) * cfg.epochs;

  // Prior rows cycle through a reshuffled A independently of B.
  std::vector<std::int64_t> a_order;
  std::size_t a_pos = 0;
  auto next_a = [&](std::size_t n) {
    std::vector<std::int64_t> rows;
    while (rows.size() < n) {
      if (a_pos == a_order.size()) {
        a_order = num::shuffled_batches(data.a.size(), data.a.size(), rng).front();
        a_pos = 0;
      }
      rows.push_back(a_order[a_pos++]);
    }
    return rows;
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochLosses acc;
    std::size_t seen = 0;
    for (const auto& b_rows : num::shuffled_batches(data.b.size(), bsz, rng)) {
      const auto a_rows = next_a(b_rows.size());
      const TrainingBatch batch = make_batch(data, b_rows, a_rows, codec, schedule, cfg, rng);
      opt.set_lr(num::cosine_lr(cfg.lr, opt.steps(), total));
      num::Tape tape;
      Bound bp(tape, base.params(), false);
      Bound ap(tape, adaptor.params(), true);
      const LossTerms l = adaptor_losses(base, bp, adaptor, ap, batch, cfg);
      const float all = l.all.value().item();
      require(std::isfinite(all), ErrorCode::kNonFinite,
              "adaptor loss became non-finite in epoch " + std::to_string(epoch) +
                  "; the last epoch checkpoint is the last good state");
      tape.backward(l.all);
      opt.step(ap.gradients());
      const double w = static_cast<double>(b_rows.size());
      acc.std_ += l.std_.value().item() * w;
      acc.pr += l.pr.value().item() * w;
      acc.cyc += l.cyc.value().item() * w;
      acc.all += all * w;
      seen += b_rows.size();
    }
    const double n = static_cast<double>(seen);
    rep.epochs.push_back({acc.std_ / n, acc.pr / n, acc.cyc / n, acc.all / n});
    if (on_epoch) on_epoch(epoch, adaptor);
  }
  rep.base_checksum_after = base.params().checksum();
  require(rep.base_checksum_after == rep.base_checksum_before, ErrorCode::kInternal,
          "base parameters changed during adaptor training");
  if (report) *report = std::move(rep);
  return adaptor;
}

}  // namespace smoodi
