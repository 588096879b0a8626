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

#include "smoodi/schedule.hpp"

#include <cmath>
#include <string>

#include "smoodi/error.hpp"

namespace smoodi {

using num::Tensor;

NoiseSchedule::NoiseSchedule(int timesteps, double beta_start, double beta_end)
    : t_(timesteps) {
  require(timesteps >= 1, ErrorCode::kConfig, "schedule needs at least one step");
  require(beta_start > 0 && beta_end < 1 && beta_start <= beta_end, ErrorCode::kConfig,
          "betas must satisfy 0 < start <= end < 1");
  beta_.assign(static_cast<std::size_t>(timesteps) + 1, 0.0);
  alpha_bar_.assign(static_cast<std::size_t>(timesteps) + 1, 1.0);
  for (int t = 1; t <= timesteps; ++t) {
    const double f = timesteps == 1 ? 0.0 : static_cast<double>(t - 1) / (timesteps - 1);
    beta_[t] = beta_start + f * (beta_end - beta_start);
    alpha_bar_[t] = alpha_bar_[t - 1] * (1.0 - beta_[t]);
  }
}

double NoiseSchedule::beta(int t) const {
  require(t >= 1 && t <= t_, ErrorCode::kInvalidArgument,
          "timestep " + std::to_string(t) + " outside [1, " + std::to_string(t_) + "]");
  return beta_[static_cast<std::size_t>(t)];
}

double NoiseSchedule::alpha_bar(int t) const {
  require(t >= 0 && t <= t_, ErrorCode::kInvalidArgument,
          "timestep " + std::to_string(t) + " outside [0, " + std::to_string(t_) + "]");
  return alpha_bar_[static_cast<std::size_t>(t)];
}

std::vector<int> NoiseSchedule::inference_steps(int steps) const {
  require(steps >= 1 && steps <= t_, ErrorCode::kInvalidArgument,
          "inference step count must lie in [1, T]");
  std::vector<int> out;
  for (int i = 1; i <= steps; ++i)
    out.push_back(static_cast<int>(std::lround(static_cast<double>(i) * t_ / steps)));
  return out;
}

int NoiseSchedule::scaled_timestep(int t_ref, int t_ref_total) const {
  require(t_ref >= 0 && t_ref <= t_ref_total && t_ref_total >= 1, ErrorCode::kInvalidArgument,
          "reference timestep outside its schedule");
  if (t_ref_total == t_) return t_ref;
  // Match the signal level, not the index: the reference schedule shares
  // this one's beta endpoints but spans t_ref_total steps.
  const NoiseSchedule ref(t_ref_total, beta_[1], t_ > 1 ? beta_[t_] : beta_[1]);
  const double level = ref.alpha_bar(t_ref);
  int t = 0;
  while (t < t_ && alpha_bar_[static_cast<std::size_t>(t) + 1] >= level) ++t;
  return t;
}

namespace {

void check_pair(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), ErrorCode::kShapeMismatch,
          "latent/noise shapes differ: " + num::to_string(a.shape()) + " vs " +
              num::to_string(b.shape()));
}

std::vector<int> broadcast_t(const Tensor& z, int t) {
  const std::size_t rows = z.rank() == 0 ? 1 : static_cast<std::size_t>(z.dim(0));
  return std::vector<int>(rows, t);
}

// out = a * x + b * y per row, with row coefficients from `coef`.
template <typename Coef>
Tensor rowwise(const Tensor& x, const Tensor& y, std::span<const int> t, Coef coef) {
  check_pair(x, y);
  const std::size_t rows = x.rank() == 0 ? 1 : static_cast<std::size_t>(x.dim(0));
  require(t.size() == rows, ErrorCode::kShapeMismatch, "one timestep per row expected");
  const std::size_t width = rows ? x.size() / rows : 0;
  Tensor out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const auto [a, b] = coef(t[r]);
    for (std::size_t j = 0; j < width; ++j) {
      const std::size_t i = r * width + j;
      out[i] = static_cast<float>(a * static_cast<double>(x[i]) + b * static_cast<double>(y[i]));
    }
  }
  return out;
}

}  // namespace

Tensor add_noise(const Tensor& z0, const Tensor& eps, std::span<const int> t,
                 const NoiseSchedule& s) {
  return rowwise(z0, eps, t, [&](int ti) {
    require(ti >= 1, ErrorCode::kInvalidArgument, "add_noise needs t >= 1");
    const double ab = s.alpha_bar(ti);
    return std::pair{std::sqrt(ab), std::sqrt(1.0 - ab)};
  });
}

Tensor add_noise(const Tensor& z0, const Tensor& eps, int t, const NoiseSchedule& s) {
  const auto ts = broadcast_t(z0, t);
  return add_noise(z0, eps, ts, s);
}

Tensor predict_clean_latent(const Tensor& zt, const Tensor& eps, int t, const NoiseSchedule& s) {
  require(t >= 1, ErrorCode::kInvalidArgument, "predict_clean_latent needs t >= 1");
  const double ab = s.alpha_bar(t);
  require(ab > 0, ErrorCode::kInternal, "schedule corruption: alpha_bar <= 0");
  const auto ts = broadcast_t(zt, t);
  return rowwise(zt, eps, ts, [&](int) {
    return std::pair{1.0 / std::sqrt(ab), -std::sqrt(1.0 - ab) / std::sqrt(ab)};
  });
}

namespace {

// Shared body of both DDIM directions: re-noise z0_hat(z_from, eps) to `to`.
Tensor ddim_move(const Tensor& z, const Tensor& eps, int from, int to, const NoiseSchedule& s) {
  check_pair(z, eps);
  const double ab_from = s.alpha_bar(from), ab_to = s.alpha_bar(to);
  require(ab_from > 0, ErrorCode::kInternal, "schedule corruption: alpha_bar <= 0");
  const double inv = 1.0 / std::sqrt(ab_from), c_from = std::sqrt(1.0 - ab_from);
  const double a_to = std::sqrt(ab_to), b_to = std::sqrt(1.0 - ab_to);
  Tensor out(z.shape());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double e = eps[i];
    const double x0 = (static_cast<double>(z[i]) - c_from * e) * inv;
    out[i] = static_cast<float>(a_to * x0 + b_to * e);
  }
  return out;
}

}  // namespace

Tensor ddim_step(const Tensor& zt, const Tensor& eps, int t, int t_prev, const NoiseSchedule& s) {
  require(t_prev >= 0 && t_prev <= t, ErrorCode::kInvalidArgument,
          "ddim_step needs t >= t_prev >= 0 (got " + std::to_string(t) + " -> " +
              std::to_string(t_prev) + ")");
  check_pair(zt, eps);
  if (t_prev == t) return zt;
  return ddim_move(zt, eps, t, t_prev, s);
}

Tensor ddim_invert_step(const Tensor& zt, const Tensor& eps, int t, int t_next,
                        const NoiseSchedule& s) {
  require(t >= 0 && t_next >= t, ErrorCode::kInvalidArgument,
          "ddim_invert_step needs t_next >= t >= 0 (got " + std::to_string(t) + " -> " +
              std::to_string(t_next) + ")");
  check_pair(zt, eps);
  if (t_next == t) return zt;
  return ddim_move(zt, eps, t, t_next, s);
}

}  // namespace smoodi
