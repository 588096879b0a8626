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

// Sampling, inversion and the adaptor training objective on small untrained
// model sets.

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "smoodi/error.hpp"
#include "smoodi/sampler.hpp"
#include "smoodi/trainer.hpp"
#include "test_support.hpp"

using namespace smoodi;
using num::Tensor;
using smoodi::testing::random_tensor;

namespace {

void perturb(num::ParameterStore& ps, std::uint64_t seed, float scale) {
  std::uint64_t k = seed;
  for (const auto& name : ps.names()) {
    Tensor& t = ps.mutable_get(name);
    const Tensor r = random_tensor(t.shape(), ++k, scale);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += r[i];
  }
}

ModelSet small_models(bool with_adaptor) {
  ModelSet m;
  num::Rng rng(7);
  CodecConfig cc;
  cc.latent_dim = 8;
  cc.hidden = 32;
  m.codec = Codec(cc, rng);
  DenoiserConfig dc;
  dc.latent_dim = 8;
  dc.d_model = 16;
  dc.blocks = 2;
  dc.ffn = 32;
  dc.tokens = 2;
  m.base = Denoiser(dc, rng);
  perturb(m.base.mutable_params(), 1, 0.05f);
  OracleConfig oc;
  oc.d_model = 16;
  oc.ffn = 32;
  m.style_oracle = Oracle(oc, rng);
  m.eval_style_oracle = Oracle(oc, rng);
  oc.kind = OracleKind::kContent;
  m.content_oracle = Oracle(oc, rng);
  if (with_adaptor) m.adaptor = Adaptor(m.base, {}, rng);
  for (int c = 0; c < motion::kChannels; ++c) {
    m.norm.mean[static_cast<std::size_t>(c)] = 0.0f;
    m.norm.stddev[static_cast<std::size_t>(c)] = 1.0f;
  }
  return m;
}

SampleRequest request(std::size_t n) {
  SampleRequest r;
  for (std::size_t i = 0; i < n; ++i) {
    r.content.push_back(static_cast<int>(i % 6));
    r.seeds.push_back(1000 + i);
  }
  r.steps = 10;
  return r;
}

TrainingData tiny_data() {
  TrainingData d;
  for (int i = 0; i < 6; ++i)
    d.a.push_back(motion::synthesize(motion::content_from_id(i), motion::Style::kNeutral,
                                     static_cast<std::uint64_t>(i)));
  for (int i = 0; i < 6; ++i)
    d.b.push_back(motion::synthesize(i % 2 ? motion::Content::kWalkCircle
                                           : motion::Content::kWalkLine,
                                     motion::style_from_id(1 + i), 100 + i));
  std::vector<motion::MotionSequence> all(d.a);
  all.insert(all.end(), d.b.begin(), d.b.end());
  d.norm = motion::compute_normalization(all);
  return d;
}

}  // namespace

TEST(InitialNoise, PerRowStreamsIndependentOfBatch) {
  const std::vector<std::uint64_t> seeds{5, 6, 7};
  const Tensor all = initial_noise(seeds, 8);
  const std::vector<std::uint64_t> one{6};
  EXPECT_TRUE(num::bitwise_equal(all.rows(1, 1), initial_noise(one, 8)));
}

TEST(Sample, DeterministicForFixedSeeds) {
  const ModelSet m = small_models(true);
  SampleRequest r = request(3);
  r.style = random_tensor({3, motion::kFrames, motion::kChannels}, 3);
  r.trace = true;
  const SampleOutput a = sample(r, m), b = sample(r, m);
  EXPECT_TRUE(num::bitwise_equal(a.z0, b.z0));
  EXPECT_TRUE(num::bitwise_equal(a.frames, b.frames));
  EXPECT_EQ(a.trace, b.trace);
  ASSERT_EQ(a.trace.size(), 10u);
  EXPECT_EQ(a.trace.front().rfind("step=1000 G=", 0), 0u);
  EXPECT_NE(a.trace.back().find(" eps_norm="), std::string::npos);
  EXPECT_EQ(a.g_final.size(), 3u);
}

TEST(Sample, StyleMachineryInertReducesToBase) {
  const ModelSet m = small_models(false);
  SampleRequest r = request(4);
  r.weights.w_s = 0.0f;
  r.guidance.k_early = r.guidance.k_late = 0;
  const SampleOutput with_defaults = sample(r, m);
  r.weights.w_s = 3.0f;  // no reference: the style term is c - c = 0
  EXPECT_TRUE(num::bitwise_equal(sample(r, m).z0, with_defaults.z0));
}

TEST(Sample, FreshAdaptorMatchesBasePipelineBitwise) {
  const ModelSet m = small_models(true);
  for (int trial = 0; trial < 5; ++trial) {
    SampleRequest base = request(4);
    for (auto& s : base.seeds) s += static_cast<std::uint64_t>(trial) * 17;
    base.guidance.tau = 0.0f;
    SampleRequest styled = base;
    styled.style = random_tensor({4, motion::kFrames, motion::kChannels}, 50 + trial);
    EXPECT_TRUE(num::bitwise_equal(sample(styled, m).z0, sample(base, m).z0)) << trial;
  }
}

TEST(Sample, ZeroedResidualsIgnoreTheAdaptor) {
  ModelSet m = small_models(true);
  perturb(m.adaptor->mutable_params(), 9, 0.1f);
  SampleRequest r = request(2);
  r.guidance.tau = 0.0f;
  r.style = random_tensor({2, motion::kFrames, motion::kChannels}, 8);
  SampleRequest off = r;
  off.use_adaptor = false;
  SampleRequest none = r;
  none.style.reset();
  EXPECT_TRUE(num::bitwise_equal(sample(off, m).z0, sample(none, m).z0));
  EXPECT_FALSE(num::bitwise_equal(sample(r, m).z0, sample(none, m).z0));
}

TEST(Sample, BadRequestsAreErrors) {
  const ModelSet m = small_models(false);
  SampleRequest r = request(2);
  r.content.pop_back();
  EXPECT_THROW(sample(r, m), Error);
  r = request(2);
  r.content[0] = 9;
  EXPECT_THROW(sample(r, m), Error);
  r = request(2);
  r.steps = 0;
  EXPECT_THROW(sample(r, m), Error);
}

TEST(Inversion, ConsistentWithSamplingOnOwnOutput) {
  // The inverse recurrence replays the sampler's step pairs in reverse, so
  // for a smooth eps it lands near the original z_T.
  const ModelSet m = small_models(false);
  SampleRequest r = request(3);
  r.weights = {1.0f, 0.0f};
  r.steps = 50;
  const SampleOutput out = sample(r, m);
  const Tensor z0 = out.z0;
  // Invert from the clean latent itself (skip the codec round trip).
  Tensor z = z0;
  int t = 0;
  for (int tn : m.schedule.inference_steps(50)) {
    const Tensor eps = guided_eps(m, z, tn, r.content, nullptr, r.weights, false);
    z = ddim_invert_step(z, eps, t, tn, m.schedule);
    t = tn;
  }
  const Tensor zt = initial_noise(r.seeds, 8);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < zt.size(); ++i) {
    num += (z[i] - zt[i]) * (z[i] - zt[i]);
    den += zt[i] * zt[i];
  }
  EXPECT_LE(std::sqrt(num / den), 0.1);
}

TEST(Inversion, RunsFromFramesAndStaysFinite) {
  const ModelSet m = small_models(false);
  const Tensor x = random_tensor({2, motion::kFrames, motion::kChannels}, 12);
  const Tensor z = ddim_invert(m, x, std::vector<int>{0, 1}, 30);
  EXPECT_EQ(z.shape(), (num::Shape{2, 8}));
  EXPECT_TRUE(z.all_finite());
  EXPECT_THROW(ddim_invert(m, x, std::vector<int>{0}, 30), Error);
}

TEST(Transfer, ProducesOneStyledSamplePerSource) {
  const ModelSet m = small_models(true);
  const Tensor x = random_tensor({2, motion::kFrames, motion::kChannels}, 13);
  const Tensor s = random_tensor({2, motion::kFrames, motion::kChannels}, 14);
  TransferConfig cfg;
  cfg.steps = 5;
  const SampleOutput out = style_transfer(m, x, std::vector<int>{0, 1}, s, cfg);
  EXPECT_EQ(out.frames.shape(), (num::Shape{2, motion::kFrames, motion::kChannels}));
  EXPECT_EQ(out.g_final.size(), 2u);
}

// --- trainer ------------------------------------------------------------------

TEST(Trainer, LossesNonNegativeAndAdditive) {
  const ModelSet m = small_models(false);
  const TrainingData d = tiny_data();
  TrainerConfig cfg;
  num::Rng rng(3), arng(4);
  const Adaptor a(m.base, {}, arng);
  const std::vector<std::int64_t> rows{0, 1, 2, 3};
  const TrainingBatch batch = make_batch(d, rows, rows, m.codec, m.schedule, cfg, rng);
  num::Tape tape;
  num::Bound bp(tape, m.base.params(), false), ap(tape, a.params(), true);
  const LossTerms l = adaptor_losses(m.base, bp, a, ap, batch, cfg);
  const double s = l.std_.value().item(), p = l.pr.value().item(), c = l.cyc.value().item();
  EXPECT_GE(s, 0.0);
  EXPECT_GE(p, 0.0);
  EXPECT_GE(c, 0.0);
  EXPECT_NEAR(l.all.value().item(), s + cfg.lambda_pr * p + cfg.lambda_cyc * c, 1e-5 * (1 + s));
}

TEST(Trainer, FreshAdaptorLossEqualsBaseLoss) {
  const ModelSet m = small_models(false);
  const TrainingData d = tiny_data();
  TrainerConfig cfg;
  cfg.content_dropout = 0.5f;
  num::Rng rng(5), arng(6);
  const Adaptor a(m.base, {}, arng);
  const std::vector<std::int64_t> rows{0, 2, 4, 5};
  const TrainingBatch batch = make_batch(d, rows, rows, m.codec, m.schedule, cfg, rng);
  num::Tape tape;
  num::Bound bp(tape, m.base.params(), false), ap(tape, a.params(), false);
  const float styled = loss_std(m.base, bp, a, ap, batch).value().item();
  const Tensor pred = m.base.predict_noise(batch.styled.z_t, batch.styled.t, batch.styled.content);
  num::Tape t2;
  const float base = num::mse(t2.constant(pred), t2.constant(batch.styled.eps)).value().item();
  EXPECT_EQ(styled, base);
}

TEST(Trainer, PerfectPredictionsGiveZeroAndCycleIsSymmetric) {
  num::Tape tape;
  const Tensor e1 = random_tensor({3, 4}, 1), e2 = random_tensor({3, 4}, 2);
  Tensor target(e1.shape());
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = e1[i] + e2[i];
  // The cycle residual vanishes when each prediction equals its own target noise.
  EXPECT_EQ(num::mse(tape.constant(e1) + tape.constant(e2), tape.constant(target)).value().item(),
            0.0f);
  const Tensor p1 = random_tensor({3, 4}, 3), p2 = random_tensor({3, 4}, 4);
  const float ab = num::mse(tape.constant(p1) + tape.constant(p2), tape.constant(target))
                       .value()
                       .item();
  const float ba = num::mse(tape.constant(p2) + tape.constant(p1), tape.constant(target))
                       .value()
                       .item();
  EXPECT_EQ(ab, ba);
}

TEST(Trainer, BatchMaskingAndDropoutRates) {
  const ModelSet m = small_models(false);
  const TrainingData d = tiny_data();
  TrainerConfig cfg;
  cfg.content_dropout = 1.0f;
  cfg.style_mask = 1.0f;
  num::Rng rng(8);
  const std::vector<std::int64_t> rows{0, 1};
  const TrainingBatch b = make_batch(d, rows, rows, m.codec, m.schedule, cfg, rng);
  for (int c : b.styled.content) EXPECT_EQ(c, kNullContent);
  for (float v : b.styled.style.data()) ASSERT_EQ(v, 0.0f);
  // Cycle items pair B content with neutral and A content with the B style.
  EXPECT_EQ(b.cycle.content_b[1], static_cast<int>(d.b[1].content));
  EXPECT_EQ(b.cycle.content_a[1], static_cast<int>(d.a[1].content));
}

TEST(Trainer, OnlyAdaptorParametersTrainAndRunsAreReproducible) {
  const ModelSet m = small_models(false);
  const TrainingData d = tiny_data();
  TrainerConfig cfg;
  cfg.epochs = 2;
  cfg.batch = 4;
  cfg.lr = 1e-3f;
  AdaptorTrainReport r1, r2;
  int calls = 0;
  const Adaptor a = train_adaptor(d, m.codec, m.base, m.schedule, cfg, &r1,
                                  [&](int, const Adaptor&) { ++calls; });
  const Adaptor b = train_adaptor(d, m.codec, m.base, m.schedule, cfg, &r2);
  EXPECT_EQ(calls, 2);
  EXPECT_EQ(r1.base_checksum_before, r1.base_checksum_after);
  EXPECT_EQ(a.params().checksum(), b.params().checksum());
  ASSERT_EQ(r1.epochs.size(), 2u);
  EXPECT_EQ(r1.epochs[1].all, r2.epochs[1].all);
  for (const auto& name : a.params().names())
    EXPECT_FALSE(m.base.params().contains(name)) << name;

  const auto csv = std::filesystem::temp_directory_path() / "smoodi_losses.csv";
  write_loss_csv(csv, r1);
  std::ifstream is(csv);
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "epoch,loss_std,loss_pr,loss_cyc,loss_all");
}
