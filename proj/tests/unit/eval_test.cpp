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
#include <random>

#include "smoodi/error.hpp"
#include "smoodi/eval.hpp"
#include "test_support.hpp"

using namespace smoodi;
using num::Tensor;

namespace {

Tensor gaussian(std::int64_t n, std::int64_t d, double mean, double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(mean, sd);
  Tensor t({n, d});
  for (auto& v : t.mutable_data()) v = static_cast<float>(nd(rng));
  return t;
}

Tensor frames_of(const motion::MotionSequence& s) {
  return s.frames.reshaped({1, motion::kFrames, motion::kChannels});
}

}  // namespace

TEST(Ffd, ZeroOnIdenticalSets) {
  const Tensor x = gaussian(500, 6, 0.3, 1.5, 1);
  const FfdResult r = ffd(x, x);
  EXPECT_LE(r.value, 1e-4);
  EXPECT_GE(r.value, 0.0);
  EXPECT_FALSE(r.regularized);
}

TEST(Ffd, MeanOffsetClosedForm) {
  // Same covariance, mean shift of 1 per dimension: value ~ d.
  const Tensor a = gaussian(20000, 4, 0.0, 1.0, 2), b = gaussian(20000, 4, 1.0, 1.0, 3);
  EXPECT_NEAR(ffd(a, b).value, 4.0, 0.15);
}

TEST(Ffd, ScaleClosedForm) {
  // N(0, I) vs N(0, 9 I): d (1 + 9 - 2 * 3) = 4 d.
  const Tensor a = gaussian(20000, 4, 0.0, 1.0, 4), b = gaussian(20000, 4, 0.0, 3.0, 5);
  EXPECT_NEAR(ffd(a, b).value, 16.0, 0.6);
}

TEST(Ffd, Symmetric) {
  const Tensor a = gaussian(300, 5, 0.0, 1.0, 6), b = gaussian(200, 5, 0.5, 2.0, 7);
  EXPECT_NEAR(ffd(a, b).value, ffd(b, a).value, 1e-9 * (1 + ffd(a, b).value));
}

TEST(Ffd, SingularCovarianceIsRegularizedAndFlagged) {
  // Fewer samples than dimensions.
  const Tensor a = gaussian(4, 10, 0.0, 1.0, 8), b = gaussian(50, 10, 0.0, 1.0, 9);
  const FfdResult r = ffd(a, b);
  EXPECT_TRUE(r.regularized);
  EXPECT_TRUE(std::isfinite(r.value));
}

TEST(Ffd, BadInputsAreErrors) {
  EXPECT_THROW(ffd(gaussian(10, 3, 0, 1, 1), gaussian(10, 4, 0, 1, 2)), Error);
  EXPECT_THROW(ffd(gaussian(1, 3, 0, 1, 1), gaussian(10, 3, 0, 1, 2)), Error);
}

TEST(Diversity, ZeroOnIdenticalAndHomogeneous) {
  Tensor same({20, 3});
  for (auto& v : same.mutable_data()) v = 1.25f;
  EXPECT_EQ(diversity(same, 50, 1), 0.0);
  const Tensor x = gaussian(40, 6, 0.0, 1.0, 10);
  Tensor x2 = x;
  for (auto& v : x2.mutable_data()) v *= 2.0f;
  EXPECT_NEAR(diversity(x2, 100, 3), 2.0 * diversity(x, 100, 3), 1e-9 * diversity(x2, 100, 3));
  EXPECT_EQ(diversity(x, 100, 3), diversity(x, 100, 3));
  EXPECT_THROW(diversity(gaussian(1, 3, 0, 1, 1), 10, 1), Error);
}

TEST(RecognitionAccuracy, CountsMatches) {
  const std::vector<int> p{0, 1, 2, 3}, y{0, 1, 0, 0};
  EXPECT_DOUBLE_EQ(recognition_accuracy(p, y), 0.5);
  EXPECT_THROW(recognition_accuracy(p, std::vector<int>{0}), Error);
}

TEST(RecognitionAccuracy, ChanceUnderPermutedLabels) {
  std::mt19937_64 rng(12);
  std::vector<int> y;
  for (int i = 0; i < 4000; ++i) y.push_back(i % motion::kNumStyles);
  std::vector<int> p(y);
  std::shuffle(p.begin(), p.end(), rng);
  const double acc = recognition_accuracy(p, y), chance = 1.0 / motion::kNumStyles;
  EXPECT_NEAR(acc, chance, 1.96 * std::sqrt(chance * (1 - chance) / 4000.0));
}

TEST(KinematicViolation, GroundTruthIsConsistent) {
  for (int c = 0; c < motion::kNumContents; ++c)
    for (int s = 0; s < motion::kNumStyles; ++s) {
      const auto style = motion::style_from_id(s);
      if (style == motion::Style::kJitter) continue;
      const auto seq = motion::synthesize(motion::content_from_id(c), style, 100 + c * 8 + s);
      EXPECT_LE(kinematic_violation(frames_of(seq)), 0.01) << c << "/" << s;
    }
}

TEST(KinematicViolation, ZeroedVelocityWhileMovingIsAViolation) {
  auto seq = motion::synthesize(motion::Content::kWalkLine, motion::Style::kHurried, 3);
  Tensor f = seq.frames;
  for (std::int64_t k = 0; k < motion::kFrames; ++k) {
    f[static_cast<std::size_t>(k * motion::kChannels + motion::kVelX)] = 0.0f;
    f[static_cast<std::size_t>(k * motion::kChannels + motion::kVelY)] = 0.0f;
  }
  EXPECT_GE(kinematic_violation(f), 0.95);
  EXPECT_THROW(kinematic_violation(Tensor({3, 8})), Error);
}
