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

// Codec, denoiser, adaptor and oracle contracts on small untrained or
// briefly trained networks.

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "smoodi/adaptor.hpp"
#include "smoodi/codec.hpp"
#include "smoodi/denoiser.hpp"
#include "smoodi/error.hpp"
#include "smoodi/oracle.hpp"
#include "test_support.hpp"

using namespace smoodi;
using num::Tensor;
using smoodi::testing::random_tensor;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "smoodi_models_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

DenoiserConfig small_denoiser() {
  DenoiserConfig c;
  c.latent_dim = 8;
  c.d_model = 16;
  c.blocks = 2;
  c.heads = 2;
  c.ffn = 32;
  c.tokens = 3;
  return c;
}

Denoiser make_denoiser(std::uint64_t seed = 1) {
  num::Rng rng(seed);
  return Denoiser(small_denoiser(), rng);
}

// Nudges every parameter so the net is not at its (partly zero) init.
void perturb(num::ParameterStore& ps, std::uint64_t seed) {
  std::uint64_t k = seed;
  for (const auto& name : ps.names()) {
    Tensor& t = ps.mutable_get(name);
    const Tensor r = random_tensor(t.shape(), ++k, 0.05f);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += r[i];
  }
}

std::vector<int> fill(std::size_t n, int v) { return std::vector<int>(n, v); }

}  // namespace

// --- codec --------------------------------------------------------------------

TEST(Codec, DeterministicAndFiniteOnZeros) {
  CodecConfig cfg;
  cfg.latent_dim = 8;
  cfg.hidden = 32;
  num::Rng r1(5), r2(5);
  const Codec a(cfg, r1), b(cfg, r2);
  const Tensor zeros({2, motion::kFrames, motion::kChannels});
  const Tensor za = a.encode(zeros);
  EXPECT_EQ(za.shape(), (num::Shape{2, 8}));
  EXPECT_TRUE(za.all_finite());
  EXPECT_TRUE(num::bitwise_equal(za, b.encode(zeros)));
  const Tensor x = a.decode(random_tensor({3, 8}, 6));
  EXPECT_EQ(x.shape(), (num::Shape{3, motion::kFrames, motion::kChannels}));
  EXPECT_TRUE(x.all_finite());
}

TEST(Codec, ShapeMismatchIsAnError) {
  CodecConfig cfg;
  cfg.latent_dim = 8;
  cfg.hidden = 32;
  num::Rng rng(1);
  const Codec c(cfg, rng);
  EXPECT_THROW(c.encode(Tensor({2, 32, 8})), Error);
  EXPECT_THROW(c.decode(Tensor({2, 9})), Error);
}

TEST(Codec, ShortTrainingLowersLossAndRoundTripsThroughDisk) {
  std::vector<motion::MotionSequence> seqs;
  for (int c = 0; c < motion::kNumContents; ++c)
    for (int i = 0; i < 8; ++i)
      seqs.push_back(motion::synthesize(motion::content_from_id(c), motion::Style::kNeutral,
                                        static_cast<std::uint64_t>(c * 100 + i)));
  const auto norm = motion::compute_normalization(seqs);
  const Tensor x = stack_normalized(seqs, norm);
  CodecConfig cfg;
  cfg.latent_dim = 16;
  cfg.hidden = 64;
  cfg.epochs = 20;
  cfg.batch = 16;
  cfg.lr = 2e-3f;
  CodecReport rep;
  const Codec codec = train_codec(x, x.rows(0, 8), cfg, &rep);
  ASSERT_EQ(rep.epoch_loss.size(), 20u);
  EXPECT_LT(rep.epoch_loss.back(), 0.5 * rep.epoch_loss.front());

  const auto path = scratch("codec.ckpt");
  codec.save(path, "note=unit");
  std::string header;
  const Codec back = Codec::load(path, &header);
  EXPECT_NE(header.find("codec v1 d=16"), std::string::npos);
  EXPECT_NE(header.find("note=unit"), std::string::npos);
  EXPECT_TRUE(num::bitwise_equal(back.encode(x.rows(0, 4)), codec.encode(x.rows(0, 4))));
}

// --- denoiser -----------------------------------------------------------------

TEST(Denoiser, ZeroResidualsAreBitIdenticalToNone) {
  Denoiser d = make_denoiser();
  perturb(d.mutable_params(), 3);
  const Tensor z = random_tensor({5, 8}, 7);
  const std::vector<int> t{1, 10, 500, 999, 1000};
  const std::vector<int> c{0, 1, 2, 5, kNullContent};
  std::vector<Tensor> zeros(2, Tensor({5, 4, 16}));
  EXPECT_TRUE(num::bitwise_equal(d.predict_noise(z, t, c, &zeros), d.predict_noise(z, t, c)));
}

TEST(Denoiser, DeterministicAndFiniteOnWideInputs) {
  const Denoiser a = make_denoiser(9), b = make_denoiser(9);
  EXPECT_EQ(a.params().checksum(), b.params().checksum());
  for (int draw = 0; draw < 1000; draw += 50) {
    // 50 rows per call: 1000 draws of N(0, 3I) in total.
    const Tensor z = random_tensor({50, 8}, 100 + draw, std::sqrt(3.0f));
    std::vector<int> t(50), c(50);
    for (int i = 0; i < 50; ++i) {
      t[i] = 1 + (draw + i * 37) % 1000;
      c[i] = (draw + i) % kContentSlots;
    }
    const Tensor e = a.predict_noise(z, t, c);
    ASSERT_TRUE(e.all_finite());
    ASSERT_TRUE(num::bitwise_equal(e, b.predict_noise(z, t, c)));
  }
}

TEST(Denoiser, BatchCompositionDoesNotChangeRows) {
  Denoiser d = make_denoiser();
  perturb(d.mutable_params(), 4);
  const Tensor z = random_tensor({6, 8}, 8);
  const std::vector<int> t{3, 40, 500, 7, 900, 1000}, c{0, 1, 2, 3, 4, 6};
  const Tensor all = d.predict_noise(z, t, c);
  const Tensor one = d.predict_noise(z.rows(2, 1), std::vector<int>{500}, std::vector<int>{2});
  EXPECT_TRUE(num::bitwise_equal(all.rows(2, 1), one));
}

TEST(Denoiser, ResidualCountAndTimestepRangeAreChecked) {
  const Denoiser d = make_denoiser();
  const Tensor z = random_tensor({2, 8}, 9);
  const std::vector<int> c{0, 1};
  std::vector<Tensor> three(3, Tensor({2, 4, 16}));
  EXPECT_THROW(d.predict_noise(z, std::vector<int>{5, 5}, c, &three), Error);
  EXPECT_THROW(d.predict_noise(z, std::vector<int>{0, 5}, c), Error);
  EXPECT_THROW(d.predict_noise(z, std::vector<int>{5, 1001}, c), Error);
  EXPECT_THROW(d.predict_noise(z, std::vector<int>{5, 5}, std::vector<int>{0, 7}), Error);
  EXPECT_THROW(d.predict_noise(Tensor({2, 9}), std::vector<int>{5, 5}, c), Error);
}

TEST(Denoiser, CheckpointRoundTripVerifiesChecksum) {
  Denoiser d = make_denoiser();
  const auto path = scratch("base.ckpt");
  d.save(path);
  const Denoiser back = Denoiser::load(path);
  EXPECT_EQ(back.params().checksum(), d.params().checksum());
  EXPECT_EQ(back.config().blocks, 2);
  EXPECT_EQ(back.config().d_model, 16);
}

TEST(BaseTraining, FixedSeedReproducesParameters) {
  const Tensor latents = random_tensor({40, 8}, 11);
  std::vector<int> content(40);
  for (int i = 0; i < 40; ++i) content[i] = i % motion::kNumContents;
  BaseTrainConfig tc;
  tc.epochs = 3;
  tc.batch = 16;
  NoiseSchedule s;
  BaseTrainReport r1, r2;
  const Denoiser a = train_base(latents, content, s, small_denoiser(), tc, &r1);
  const Denoiser b = train_base(latents, content, s, small_denoiser(), tc, &r2);
  EXPECT_EQ(a.params().checksum(), b.params().checksum());
  EXPECT_EQ(r1.epoch_loss, r2.epoch_loss);
}

// --- adaptor ------------------------------------------------------------------

TEST(Adaptor, ConstructionCopiesBlocksAndZeroesLinks) {
  Denoiser base = make_denoiser();
  perturb(base.mutable_params(), 12);
  num::Rng rng(1);
  const Adaptor a(base, {}, rng);
  for (const auto& [name, t] : base.params().entries()) {
    if (name.rfind("block.", 0) != 0) continue;
    const std::string copy = "copy." + name.substr(6);
    ASSERT_TRUE(a.params().contains(copy)) << copy;
    EXPECT_TRUE(num::bitwise_equal(a.params().get(copy), t)) << copy;
  }
  int links = 0;
  for (const auto& [name, t] : a.params().entries()) {
    if (name.rfind("link.", 0) != 0) continue;
    ++links;
    for (float v : t.data()) ASSERT_EQ(v, 0.0f) << name;
  }
  EXPECT_EQ(links, 2 * 2);  // weight and bias per block
}

TEST(Adaptor, FreshAdaptorLeavesBasePredictionBitIdentical) {
  Denoiser base = make_denoiser();
  perturb(base.mutable_params(), 13);
  num::Rng rng(2);
  const Adaptor a(base, {}, rng);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor z = random_tensor({4, 8}, 300 + trial, 2.0f);
    const Tensor s = random_tensor({4, motion::kFrames, motion::kChannels}, 400 + trial);
    const std::vector<int> t{1 + trial, 250, 600, 1000};
    const std::vector<int> c{trial % 6, 1, kNullContent, 4};
    num::Tape tape;
    num::Bound bp(tape, base.params(), false), ap(tape, a.params(), false);
    const num::Var style = a.encode_style(ap, tape.constant(s));
    const num::Var tokens = base.embed(bp, tape.constant(z), t, c);
    for (const auto& r : a.residuals(ap, tokens, style))
      for (float v : r.value().data()) ASSERT_EQ(v, 0.0f);
    const Tensor styled =
        stylized_predict(base, bp, a, ap, tape.constant(z), t, c, style).value();
    EXPECT_TRUE(num::bitwise_equal(styled, base.predict_noise(z, t, c))) << trial;
  }
}

TEST(Adaptor, StyleEmbeddingDeterministicAndNullIsZeroInput) {
  const Denoiser base = make_denoiser();
  num::Rng rng(3);
  const Adaptor a(base, {}, rng);
  const Tensor s = random_tensor({2, motion::kFrames, motion::kChannels}, 14);
  EXPECT_TRUE(num::bitwise_equal(a.encode_style(s), a.encode_style(s)));
  const Tensor null = a.null_style();
  EXPECT_EQ(null.shape(), (num::Shape{1, 16}));
  EXPECT_TRUE(num::bitwise_equal(
      null, a.encode_style(Tensor({1, motion::kFrames, motion::kChannels}))));
  EXPECT_THROW(a.encode_style(Tensor({1, 32, motion::kChannels})), Error);
}

TEST(Adaptor, CheckpointIsBoundToItsBase) {
  const Denoiser base = make_denoiser(1);
  num::Rng rng(4);
  const Adaptor a(base, {}, rng);
  const auto path = scratch("adaptor.ckpt");
  a.save(path);
  std::string header;
  const Adaptor back = Adaptor::load(path, base, &header);
  EXPECT_EQ(header.rfind("adaptor v1 base_checksum=" + base.params().checksum(), 0), 0u);
  EXPECT_EQ(back.params().checksum(), a.params().checksum());
  const Denoiser other = make_denoiser(2);
  try {
    Adaptor::load(path, other);
    FAIL() << "mismatched base accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kChecksumMismatch);
  }
}

// --- oracle -------------------------------------------------------------------

TEST(Oracle, HeadOfFeaturesReproducesLogitsBitwise) {
  OracleConfig cfg;
  cfg.d_model = 16;
  cfg.ffn = 32;
  num::Rng rng(5);
  const Oracle o(cfg, rng);
  const Tensor x = random_tensor({6, motion::kFrames, motion::kChannels}, 15);
  const Tensor f = o.features(x);
  EXPECT_EQ(f.shape(), (num::Shape{6, 16}));
  num::Tape tape;
  num::Bound p(tape, o.params(), false);
  const Tensor via_head = o.head(p, tape.constant(f)).value();
  EXPECT_TRUE(num::bitwise_equal(via_head, o.logits(x)));
  EXPECT_TRUE(num::bitwise_equal(f, o.features(x)));
}

TEST(Oracle, ArgmaxInvariantUnderPositiveScalingOfHeadInput) {
  OracleConfig cfg;
  cfg.kind = OracleKind::kContent;
  cfg.d_model = 16;
  cfg.ffn = 32;
  num::Rng rng(6);
  Oracle o(cfg, rng);
  // A bias-free head makes the logits linear in the features.
  for (float& v : o.mutable_params().mutable_get("cls.b").mutable_data()) v = 0.0f;
  const Tensor f = random_tensor({50, 16}, 16);
  num::Tape tape;
  num::Bound p(tape, o.params(), false);
  const auto base = argmax_rows(o.head(p, tape.constant(f)).value());
  for (float k : {0.01f, 0.5f, 3.0f, 1000.0f}) {
    Tensor g = f;
    for (auto& v : g.mutable_data()) v *= k;
    EXPECT_EQ(argmax_rows(o.head(p, tape.constant(g)).value()), base) << k;
  }
}

TEST(Oracle, CheckpointRoundTrip) {
  OracleConfig cfg;
  cfg.d_model = 16;
  cfg.ffn = 32;
  cfg.seed = 77;
  num::Rng rng(7);
  const Oracle o(cfg, rng);
  const auto path = scratch("oracle.ckpt");
  o.save(path);
  std::string header;
  const Oracle back = Oracle::load(path, &header);
  EXPECT_EQ(header.rfind("oracle v1 kind=style seed=77", 0), 0u);
  const Tensor x = random_tensor({2, motion::kFrames, motion::kChannels}, 17);
  EXPECT_TRUE(num::bitwise_equal(back.logits(x), o.logits(x)));
}

TEST(Oracle, ShortTrainingSeparatesTwoStyles) {
  std::vector<motion::MotionSequence> seqs;
  for (int i = 0; i < 40; ++i)
    seqs.push_back(motion::synthesize(motion::Content::kWalkLine,
                                      i % 2 ? motion::Style::kWobble : motion::Style::kNeutral,
                                      static_cast<std::uint64_t>(i)));
  const auto norm = motion::compute_normalization(seqs);
  std::vector<int> y;
  for (const auto& s : seqs) y.push_back(static_cast<int>(s.style));
  OracleConfig cfg;
  cfg.d_model = 16;
  cfg.ffn = 32;
  cfg.epochs = 40;
  cfg.batch = 8;
  cfg.lr = 3e-3f;
  OracleReport rep;
  const Oracle o = train_oracle(stack_normalized(seqs, norm), y, cfg, &rep);
  EXPECT_GE(rep.train_accuracy, 0.9);
  OracleReport again;
  const Oracle o2 = train_oracle(stack_normalized(seqs, norm), y, cfg, &again);
  EXPECT_EQ(o.params().checksum(), o2.params().checksum());
}
