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

// Linear-beta noise schedule and the deterministic (eta = 0) update rules
// built on it. All per-row operations take either one timestep for the
// whole batch or one timestep per row.

#include <span>
#include <vector>

#include "smoodi/numerics/tensor.hpp"

namespace smoodi {

class NoiseSchedule {
 public:
  explicit NoiseSchedule(int timesteps = 1000, double beta_start = 1e-4,
                         double beta_end = 0.02);

  int timesteps() const noexcept { return t_; }
  /// beta_t for t in [1, T].
  double beta(int t) const;
  /// Cumulative product for t in [0, T]; alpha_bar(0) == 1.
  double alpha_bar(int t) const;

  /// `steps` timesteps, uniform stride over [1, T], ascending:
  /// round(i * T / steps) for i = 1..steps.
  std::vector<int> inference_steps(int steps) const;

  /// Timestep on this schedule whose alpha_bar matches `t_ref` on a
  /// reference schedule of length `t_ref_total` with the same betas
  /// endpoints. Identity when the lengths agree.
  int scaled_timestep(int t_ref, int t_ref_total) const;

 private:
  int t_;
  std::vector<double> beta_;       // index t, beta_[0] unused
  std::vector<double> alpha_bar_;  // index t, alpha_bar_[0] = 1
};

/// z_t = sqrt(ab_t) z_0 + sqrt(1 - ab_t) eps, t in [1, T].
num::Tensor add_noise(const num::Tensor& z0, const num::Tensor& eps, int t,
                      const NoiseSchedule& s);
num::Tensor add_noise(const num::Tensor& z0, const num::Tensor& eps,
                      std::span<const int> t, const NoiseSchedule& s);

/// z0_hat = (z_t - sqrt(1 - ab_t) eps) / sqrt(ab_t), t in [1, T].
num::Tensor predict_clean_latent(const num::Tensor& zt, const num::Tensor& eps, int t,
                                 const NoiseSchedule& s);

/// Deterministic DDIM update from t to t_prev (t >= t_prev >= 0). t_prev == t
/// returns z_t unchanged.
num::Tensor ddim_step(const num::Tensor& zt, const num::Tensor& eps, int t, int t_prev,
                      const NoiseSchedule& s);

/// Inverse recurrence from t to t_next > t (t may be 0):
/// z_next = sqrt(ab_next) z0_hat + sqrt(1 - ab_next) eps with
/// z0_hat = (z_t - sqrt(1 - ab_t) eps) / sqrt(ab_t).
num::Tensor ddim_invert_step(const num::Tensor& zt, const num::Tensor& eps, int t,
                             int t_next, const NoiseSchedule& s);

}  // namespace smoodi
