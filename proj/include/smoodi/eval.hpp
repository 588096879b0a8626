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

// Metrics: style / content recognition accuracy, Frechet feature distance,
// feature diversity and the position-velocity consistency rate.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "smoodi/guidance.hpp"
#include "smoodi/models.hpp"

namespace smoodi {

/// Fraction of rows the oracle labels as intended. At least one row.
double recognition_accuracy(const Oracle& oracle, const num::Tensor& frames,
                            std::span<const int> intended);
double recognition_accuracy(std::span<const int> predicted, std::span<const int> intended);

struct FfdResult {
  double value = 0;
  bool regularized = false;  ///< a covariance was singular; +1e-6 I was added
};

/// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2) over
/// rows of [n, k] feature matrices (unbiased covariances).
FfdResult ffd(const num::Tensor& feats_a, const num::Tensor& feats_b);

/// Mean Euclidean distance over `pairs` seeded random row pairs (i != j).
double diversity(const num::Tensor& feats, int pairs, std::uint64_t seed);

/// Fraction of stencil-range frames whose |FD(position) - velocity| exceeds
/// `threshold`, over denormalized frames [64, 8] or [B, 64, 8].
double kinematic_violation(const num::Tensor& frames, double threshold = 0.05);

struct EvalConfig {
  int samples = 300;
  std::uint64_t seed = 11;
  int steps = 50;
  GuidanceWeights weights;
  ClassifierGuidanceConfig guidance;
  bool use_style = true;    ///< false samples the base pipeline (no reference)
  bool use_adaptor = true;  ///< false zeroes the residuals at inference
  double kinematic_threshold = 0.05;
  int diversity_pairs = 300;
  int batch = 100;          ///< samples generated per sampler call
};

struct EvalRow {
  int content = 0;
  int style = 0;
  int predicted_style = 0;       ///< evaluation oracle
  int predicted_style_guide = 0; ///< guidance oracle
  int predicted_content = 0;
  double g_final = 0;
};

struct EvalReport {
  double sra = 0;        ///< evaluation-only style oracle
  double sra_guide = 0;  ///< guidance style oracle
  double cra = 0;
  double ffd = 0;
  bool ffd_regularized = false;
  double diversity = 0;
  double kinematic_violation = 0;
  int samples = 0;
  std::vector<EvalRow> rows;
};

/// Draws `samples` random (A content, B style reference) pairs from the
/// corpora and generates one sample per pair. FFD compares evaluation-oracle
/// features of the samples against exact renderings of the same cells.
EvalReport run_eval(const ModelSet& models, std::span<const motion::MotionSequence> style_refs,
                    const EvalConfig& config);

/// key=value lines; `echo` lines (already key=value) are appended verbatim.
void write_eval_report(const std::filesystem::path& path, const EvalReport& report,
                       const std::vector<std::string>& echo = {});
/// content,style,predicted_style,predicted_content,G_final
void write_eval_samples(const std::filesystem::path& path, const EvalReport& report);

}  // namespace smoodi
