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
#include "smoodi/schedule.hpp"
#include "test_support.hpp"

using namespace smoodi;
using num::Tensor;
using smoodi::testing::random_tensor;

namespace {

double max_rel(const Tensor& a, const Tensor& b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(static_cast<double>(a[i]) - b[i]);
    worst = std::max(worst, d / std::max(1.0, std::abs(static_cast<double>(b[i]))));
  }
  return worst;
}

}  // namespace

TEST(Schedule, BetasAndAlphaBar) {
  NoiseSchedule s;
  EXPECT_EQ(s.timesteps(), 1000);
  EXPECT_DOUBLE_EQ(s.alpha_bar(0), 1.0);
  EXPECT_NEAR(s.beta(1), 1e-4, 1e-12);
  EXPECT_NEAR(s.beta(1000), 0.02, 1e-12);
  for (int t = 1; t <= 1000; ++t) {
    EXPECT_GT(s.beta(t), 0.0);
    EXPECT_LT(s.beta(t), 1.0);
    EXPECT_LT(s.alpha_bar(t), s.alpha_bar(t - 1));
  }
  EXPECT_THROW(s.beta(0), Error);
  EXPECT_THROW(s.alpha_bar(1001), Error);
}

TEST(Schedule, InferenceStepsUniformStride) {
  NoiseSchedule s;
  const auto steps = s.inference_steps(50);
  ASSERT_EQ(steps.size(), 50u);
  EXPECT_EQ(steps.front(), 20);
  EXPECT_EQ(steps.back(), 1000);
  for (std::size_t i = 1; i < steps.size(); ++i) EXPECT_EQ(steps[i] - steps[i - 1], 20);
  const auto s30 = s.inference_steps(30);
  EXPECT_EQ(s30.back(), 1000);
  EXPECT_EQ(s30.front(), 33);
}

TEST(Schedule, ScaledTimestepMatchesSignalLevel) {
  NoiseSchedule s;
  EXPECT_EQ(s.scaled_timestep(300, 1000), 300);
  NoiseSchedule shorter(100, 1e-4, 0.02);
  const int t = shorter.scaled_timestep(300, 1000);
  EXPECT_GE(t, 1);
  EXPECT_LE(t, 100);
  // The mapped step sits at the reference signal level, not at index 30.
  EXPECT_NEAR(shorter.alpha_bar(t), s.alpha_bar(300), 0.05);
}

TEST(AddNoise, ZeroNoiseScalesSignal) {
  NoiseSchedule s;
  const Tensor z0 = random_tensor({4, 8}, 1);
  const Tensor zt = add_noise(z0, Tensor({4, 8}), 500, s);
  const double a = std::sqrt(s.alpha_bar(500));
  for (std::size_t i = 0; i < z0.size(); ++i) EXPECT_NEAR(zt[i], a * z0[i], 1e-6);
}

TEST(AddNoise, EarlyStepIsNearlyClean) {
  NoiseSchedule s;
  const Tensor z0 = random_tensor({4, 8}, 2);
  const Tensor zt = add_noise(z0, random_tensor({4, 8}, 3), 1, s);
  EXPECT_LT(num::max_abs_diff(zt, z0), 0.05f);
}

TEST(AddNoise, TimestepOutOfRangeIsAnError) {
  NoiseSchedule s;
  const Tensor z = random_tensor({2, 4}, 4);
  EXPECT_THROW(add_noise(z, z, 0, s), Error);
  EXPECT_THROW(add_noise(z, z, 1001, s), Error);
}

TEST(CleanPrediction, InvertsForwardNoising) {
  NoiseSchedule s;
  for (int t : {1, 20, 300, 999, 1000}) {
    const Tensor z0 = random_tensor({16, 32}, 10 + t);
    const Tensor eps = random_tensor({16, 32}, 20 + t);
    const Tensor back = predict_clean_latent(add_noise(z0, eps, t, s), eps, t, s);
    // Relative to the noise-amplified scale at t: ||z_t|| / sqrt(ab).
    const double scale = 1.0 / std::sqrt(s.alpha_bar(t));
    EXPECT_LE(max_rel(back, z0) / scale, 1e-5) << "t=" << t;
  }
}

TEST(CleanPrediction, ZeroEpsDividesBySqrtAlphaBar) {
  NoiseSchedule s;
  const Tensor z = random_tensor({3, 5}, 5);
  const Tensor x = predict_clean_latent(z, Tensor({3, 5}), 700, s);
  for (std::size_t i = 0; i < z.size(); ++i)
    EXPECT_NEAR(x[i], z[i] / std::sqrt(s.alpha_bar(700)), 1e-5);
}

TEST(CleanPrediction, ContinuousNearCleanEnd) {
  NoiseSchedule s;
  ASSERT_NEAR(s.alpha_bar(1), 0.9999, 1e-9);
  const Tensor z = random_tensor({3, 5}, 6);
  const Tensor eps = random_tensor({3, 5}, 7);
  const Tensor x = predict_clean_latent(z, eps, 1, s);
  // 1/sqrt(0.9999) differs from 1 by 5e-5, hence the relative slack.
  for (std::size_t i = 0; i < z.size(); ++i)
    EXPECT_NEAR(x[i], z[i] - 0.01 * eps[i], 1e-4 * (1.0 + std::abs(z[i])));
}

TEST(Ddim, DegenerateStepIsIdentity) {
  NoiseSchedule s;
  const Tensor z = random_tensor({4, 6}, 8);
  EXPECT_TRUE(num::bitwise_equal(ddim_step(z, random_tensor({4, 6}, 9), 400, 400, s), z));
}

TEST(Ddim, NonMonotonePairIsAnError) {
  NoiseSchedule s;
  const Tensor z = random_tensor({2, 3}, 10);
  EXPECT_THROW(ddim_step(z, z, 100, 200, s), Error);
  EXPECT_THROW(ddim_invert_step(z, z, 200, 100, s), Error);
}

TEST(Ddim, TrueNoiseReproducesForwardProcess) {
  NoiseSchedule s;
  const Tensor z0 = random_tensor({8, 32}, 11);
  const Tensor eps = random_tensor({8, 32}, 12);
  for (auto [t, tp] : {std::pair{1000, 980}, {500, 20}, {20, 0}}) {
    const Tensor stepped = ddim_step(add_noise(z0, eps, t, s), eps, t, tp, s);
    const Tensor want = tp == 0 ? z0 : add_noise(z0, eps, tp, s);
    EXPECT_LE(max_rel(stepped, want), 1e-5 / std::sqrt(s.alpha_bar(t))) << t << "->" << tp;
  }
}

TEST(Ddim, InversionAndSamplingAreMutualInversesPerStep) {
  NoiseSchedule s;
  for (auto [t, tn] : {std::pair{0, 20}, {20, 40}, {480, 500}, {980, 1000}}) {
    const Tensor z = random_tensor({8, 32}, 100 + t);
    const Tensor eps = random_tensor({8, 32}, 200 + t);
    const Tensor up = ddim_invert_step(z, eps, t, tn, s);
    const Tensor down = ddim_step(up, eps, tn, t, s);
    EXPECT_LE(max_rel(down, z), 1e-5 / std::sqrt(s.alpha_bar(tn))) << t << "<->" << tn;
  }
}

TEST(Ddim, ChainedStepsFromNoiseStayFinite) {
  NoiseSchedule s;
  const auto steps = s.inference_steps(50);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Tensor z = random_tensor({1, 32}, 1000 + seed);
    for (std::size_t i = steps.size(); i-- > 0;) {
      // A bounded stand-in predictor: a fixed fraction of the latent.
      Tensor eps = z;
      for (auto& v : eps.mutable_data()) v *= 0.5f;
      z = ddim_step(z, eps, steps[i], i ? steps[i - 1] : 0, s);
    }
    ASSERT_TRUE(z.all_finite()) << "seed " << seed;
  }
}
