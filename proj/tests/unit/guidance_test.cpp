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

#include <gtest/gtest.h>

#include <cmath>

#include "smoodi/error.hpp"
#include "smoodi/guidance.hpp"
#include "test_support.hpp"

using namespace smoodi;
using num::Tensor;
using smoodi::testing::random_tensor;

namespace {

struct Toy {
  Codec codec;
  Oracle oracle;
};

Toy make_toy() {
  CodecConfig cc;
  cc.latent_dim = 8;
  cc.hidden = 32;
  OracleConfig oc;
  oc.d_model = 16;
  oc.ffn = 32;
  num::Rng rng(21);
  return {Codec(cc, rng), Oracle(oc, rng)};
}

Tensor frames(std::int64_t n, std::uint64_t seed) {
  return random_tensor({n, motion::kFrames, motion::kChannels}, seed);
}

}  // namespace

TEST(CfgCombine, UnitWeightIdentitiesAreExact) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Tensor u = random_tensor({8, 32}, seed * 3 + 1, 3.0f);
    const Tensor c = random_tensor({8, 32}, seed * 3 + 2, 3.0f);
    const Tensor s = random_tensor({8, 32}, seed * 3 + 3, 3.0f);
    EXPECT_TRUE(num::bitwise_equal(cfg_combine(u, c, s, {1.0f, 0.0f}), c));
    EXPECT_TRUE(num::bitwise_equal(cfg_combine(u, c, s, {1.0f, 1.0f}), s));
    EXPECT_TRUE(num::bitwise_equal(cfg_combine(u, c, s, {0.0f, 0.0f}), u));
  }
}

TEST(CfgCombine, DefaultWeightsArithmetic) {
  const Tensor u({1, 3});
  const Tensor c = Tensor::vector({1.0f, -2.0f, 0.5f}).reshaped({1, 3});
  const Tensor s = Tensor::vector({0.0f, 4.0f, 2.0f}).reshaped({1, 3});
  const Tensor e = cfg_combine(u, c, s, {7.5f, 1.5f});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_FLOAT_EQ(e[i], 6.0f * c[i] + 1.5f * s[i]);
}

TEST(CfgCombine, ShapeMismatchIsAnError) {
  EXPECT_THROW(cfg_combine(Tensor({2, 3}), Tensor({2, 3}), Tensor({3, 2}), {}), Error);
}

TEST(GuidanceConfig, IterationScheduleAndValidation) {
  NoiseSchedule s;
  ClassifierGuidanceConfig cfg;
  EXPECT_EQ(cfg.iterations(1000, s), 0);
  EXPECT_EQ(cfg.iterations(301, s), 0);
  EXPECT_EQ(cfg.iterations(300, s), 5);
  EXPECT_EQ(cfg.iterations(1, s), 5);
  cfg.k_late = -1;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.k_late = 5;
  cfg.t_switch = 1001;
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_EQ(parse_grad_mode("through-network"), GradMode::kThroughNetwork);
  EXPECT_EQ(parse_guidance_sign("literal"), GuidanceSign::kLiteral);
  EXPECT_THROW(parse_guidance_sign("up"), Error);
}

TEST(StyleDistance, NonNegativeAndZeroOnSelf) {
  const Toy toy = make_toy();
  const Tensor x = frames(4, 30);
  const StyleDistance g(toy.codec, toy.oracle, x);
  for (double v : g.of_frames(x)) EXPECT_EQ(v, 0.0);
  for (double v : g.of_frames(frames(4, 31))) EXPECT_GE(v, 0.0);
  // Self-distance through the codec: reference = decode(z).
  const Tensor z = random_tensor({4, 8}, 32);
  const StyleDistance gz(toy.codec, toy.oracle, toy.codec.decode(z));
  for (double v : gz.of_latent(z)) EXPECT_EQ(v, 0.0);
}

TEST(ClassifierGuidance, NoIterationsOrZeroTauLeaveEpsBitwise) {
  const Toy toy = make_toy();
  NoiseSchedule s;
  const StyleDistance g(toy.codec, toy.oracle, frames(3, 40));
  const Tensor z = random_tensor({3, 8}, 41), eps = random_tensor({3, 8}, 42);
  ClassifierGuidanceConfig cfg;
  for (int t : {301, 600, 1000})
    EXPECT_TRUE(num::bitwise_equal(apply_classifier_guidance(z, t, eps, g, cfg, s), eps));
  cfg.tau = 0.0f;
  cfg.k_early = 3;
  for (int t : {5, 300, 900})
    EXPECT_TRUE(num::bitwise_equal(apply_classifier_guidance(z, t, eps, g, cfg, s), eps));
}

TEST(ClassifierGuidance, CleanPredictionGradientIsScaledCleanGradient) {
  const Toy toy = make_toy();
  NoiseSchedule s;
  const StyleDistance g(toy.codec, toy.oracle, frames(2, 50));
  const Tensor z = random_tensor({2, 8}, 51), eps = random_tensor({2, 8}, 52);
  const int t = 250;
  const Tensor gz = style_gradient(z, eps, t, s, g);
  // Gradient with respect to z0_hat directly.
  const Tensor x0 = predict_clean_latent(z, eps, t, s);
  num::Tape tape;
  num::Var v = tape.parameter(x0);
  tape.backward(num::sum(g.on_latent(tape, v)));
  const Tensor gx = tape.grad(v);
  const double k = 1.0 / std::sqrt(s.alpha_bar(t));
  for (std::size_t i = 0; i < gz.size(); ++i)
    EXPECT_NEAR(gz[i], k * gx[i], 1e-4 * std::max(1.0, std::abs(k * gx[i])));
}

TEST(ClassifierGuidance, GradientMatchesFiniteDifferences) {
  const Toy toy = make_toy();
  NoiseSchedule s;
  const StyleDistance g(toy.codec, toy.oracle, frames(1, 60));
  for (int state = 0; state < 3; ++state) {
    const Tensor z = random_tensor({1, 8}, 61 + state), eps = random_tensor({1, 8}, 71 + state);
    const auto program = g.clean_prediction_program(eps, 200, s);
    const auto r = smoodi::testing::check_gradient(program, {{"z_t", z}}, "G", "z_t", 8,
                                                   81 + state, 1e-2f, 1.0);
    EXPECT_LE(r.max_rel_error, 1e-3) << "state " << state;
  }
}

TEST(ClassifierGuidance, SignConventions) {
  // With a small step, descent lowers G and the literal update raises it.
  const Toy toy = make_toy();
  NoiseSchedule s;
  const StyleDistance g(toy.codec, toy.oracle, frames(8, 90));
  const Tensor z = random_tensor({8, 8}, 91), eps = random_tensor({8, 8}, 92);
  ClassifierGuidanceConfig cfg;
  cfg.tau = -1e-3f;
  cfg.k_late = 1;
  const int t = 100;
  const auto before = g.of_latent(predict_clean_latent(z, eps, t, s));
  cfg.sign = GuidanceSign::kDescent;
  const auto down = g.of_latent(
      predict_clean_latent(z, apply_classifier_guidance(z, t, eps, g, cfg, s), t, s));
  cfg.sign = GuidanceSign::kLiteral;
  const auto up = g.of_latent(
      predict_clean_latent(z, apply_classifier_guidance(z, t, eps, g, cfg, s), t, s));
  double sd = 0, su = 0, sb = 0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    sb += before[i];
    sd += down[i];
    su += up[i];
  }
  EXPECT_LT(sd, sb);
  EXPECT_GT(su, sb);
}

TEST(ClassifierGuidance, TraceRecordsEveryIterate) {
  const Toy toy = make_toy();
  NoiseSchedule s;
  const StyleDistance g(toy.codec, toy.oracle, frames(2, 95));
  ClassifierGuidanceConfig cfg;
  GuidanceTrace trace;
  apply_classifier_guidance(random_tensor({2, 8}, 96), 50, random_tensor({2, 8}, 97), g, cfg, s,
                            nullptr, &trace);
  ASSERT_EQ(trace.g_history.size(), 6u);
  for (const auto& row : trace.g_history) EXPECT_EQ(row.size(), 2u);
}

TEST(ClassifierGuidance, ThroughNetworkNeedsTheNetwork) {
  const Toy toy = make_toy();
  NoiseSchedule s;
  const StyleDistance g(toy.codec, toy.oracle, frames(1, 98));
  ClassifierGuidanceConfig cfg;
  cfg.grad_mode = GradMode::kThroughNetwork;
  const Tensor z = random_tensor({1, 8}, 99);
  EXPECT_THROW(apply_classifier_guidance(z, 10, z, g, cfg, s), Error);
  // A network whose eps does not depend on z reduces to clean-prediction mode.
  const Tensor eps = random_tensor({1, 8}, 100);
  const EpsFunction constant = [&](num::Tape& tape, num::Var) { return tape.constant(eps); };
  const Tensor a = style_gradient(z, eps, 10, s, g, GradMode::kThroughNetwork, &constant);
  const Tensor b = style_gradient(z, eps, 10, s, g);
  EXPECT_TRUE(num::bitwise_equal(a, b));
}
