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

// Split classifier-free guidance and the feature-distance style guidance.

#include <functional>
#include <string_view>
#include <vector>

#include "smoodi/codec.hpp"
#include "smoodi/numerics/program.hpp"
#include "smoodi/oracle.hpp"
#include "smoodi/schedule.hpp"

namespace smoodi {

struct GuidanceWeights {
  float w_c = 7.5f;
  float w_s = 1.5f;
};

/// eps = u + w_c (c - u) + w_s (s - c), evaluated in double per element so
/// the unit-weight identities come out exact.
num::Tensor cfg_combine(const num::Tensor& eps_uncond, const num::Tensor& eps_content,
                        const num::Tensor& eps_style, const GuidanceWeights& w);

enum class GradMode { kCleanPrediction, kThroughNetwork };

/// How tau enters the eps update.
///   kDescent: eps <- eps - tau * grad G. A negative tau lowers G.
///   kLiteral: eps <- eps + tau * grad G. A negative tau raises G, because
///             z0_hat moves against eps.
enum class GuidanceSign { kDescent, kLiteral };

std::string_view name(GradMode m);
std::string_view name(GuidanceSign s);
GradMode parse_grad_mode(std::string_view s);
GuidanceSign parse_guidance_sign(std::string_view s);

struct ClassifierGuidanceConfig {
  float tau = -0.2f;
  int k_early = 0;  ///< iterations while t > T_s
  int k_late = 5;   ///< iterations while t <= T_s
  /// T_s on a reference schedule of `t_switch_reference` steps; mapped onto
  /// the schedule in use by matching alpha_bar.
  int t_switch = 300;
  int t_switch_reference = 1000;
  GradMode grad_mode = GradMode::kCleanPrediction;
  GuidanceSign sign = GuidanceSign::kDescent;

  void validate() const;
  /// Iteration count at timestep t.
  int iterations(int t, const NoiseSchedule& s) const;
};

/// G(x) = sum_k |f(x)_k - f(s)_k| per row, with f the style feature map and
/// x = decode(z0_hat). Holds f(s) for a batch of references.
class StyleDistance {
 public:
  /// `style_frames` is normalized [B, 64, 8].
  StyleDistance(const Codec& codec, const Oracle& oracle, const num::Tensor& style_frames);

  const num::Tensor& target() const noexcept { return target_; }
  std::int64_t batch() const noexcept { return target_.dim(0); }

  /// Per-row G on the tape, [B].
  num::Var on_latent(num::Tape& tape, num::Var z0_hat) const;
  num::Var on_frames(num::Tape& tape, num::Var frames) const;

  std::vector<double> of_latent(const num::Tensor& z0_hat) const;
  std::vector<double> of_frames(const num::Tensor& frames) const;

  /// sum_rows G(z0_hat(z_t, eps)) as a Program of input "z_t" and output "G"
  /// with eps held fixed (clean-prediction mode).
  num::Program clean_prediction_program(const num::Tensor& eps, int t,
                                        const NoiseSchedule& s) const;

 private:
  const Codec* codec_;
  const Oracle* oracle_;
  num::Tensor target_;
};

/// Differentiable network eps for through-network gradients.
using EpsFunction = std::function<num::Var(num::Tape&, num::Var z_t)>;

struct GuidanceTrace {
  /// g_history[k][row]: G at the k-th z0_hat, k = 0..K (the last entry is
  /// after the final update).
  std::vector<std::vector<double>> g_history;
};

/// Gradient of sum_rows G with respect to z_t for the given eps.
num::Tensor style_gradient(const num::Tensor& z_t, const num::Tensor& eps, int t,
                           const NoiseSchedule& s, const StyleDistance& g,
                           GradMode mode = GradMode::kCleanPrediction,
                           const EpsFunction* network = nullptr,
                           std::vector<double>* values = nullptr);

/// Repeats K times: z0_hat from the current eps, grad G, eps update. K = 0 or
/// tau = 0 return `eps` untouched. `network` is required in through-network
/// mode and must reproduce `eps` at z_t.
num::Tensor apply_classifier_guidance(const num::Tensor& z_t, int t, const num::Tensor& eps,
                                      const StyleDistance& g,
                                      const ClassifierGuidanceConfig& cfg,
                                      const NoiseSchedule& s,
                                      const EpsFunction* network = nullptr,
                                      GuidanceTrace* trace = nullptr);

}  // namespace smoodi
