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

#include "smoodi/guidance.hpp"

#include <cmath>

#include "smoodi/error.hpp"

namespace smoodi {

using num::Tensor;
using num::Var;

Tensor cfg_combine(const Tensor& u, const Tensor& c, const Tensor& s, const GuidanceWeights& w) {
  require(u.shape() == c.shape() && u.shape() == s.shape(), ErrorCode::kShapeMismatch,
          "cfg_combine branches differ in shape: " + num::to_string(u.shape()) + ", " +
              num::to_string(c.shape()) + ", " + num::to_string(s.shape()));
  const double wc = w.w_c, ws = w.w_s;
  Tensor out(u.shape());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ui = u[i], ci = c[i], si = s[i];
    out[i] = static_cast<float>(ui + wc * (ci - ui) + ws * (si - ci));
  }
  return out;
}

std::string_view name(GradMode m) {
  return m == GradMode::kCleanPrediction ? "clean-prediction" : "through-network";
}

std::string_view name(GuidanceSign s) { return s == GuidanceSign::kDescent ? "descent" : "literal"; }

GradMode parse_grad_mode(std::string_view s) {
  if (s == "clean-prediction") return GradMode::kCleanPrediction;
  if (s == "through-network") return GradMode::kThroughNetwork;
  fail(ErrorCode::kConfig, "unknown grad mode '" + std::string(s) + "'");
}

GuidanceSign parse_guidance_sign(std::string_view s) {
  if (s == "descent") return GuidanceSign::kDescent;
  if (s == "literal") return GuidanceSign::kLiteral;
  fail(ErrorCode::kConfig, "unknown guidance sign '" + std::string(s) + "'");
}

void ClassifierGuidanceConfig::validate() const {
  require(std::isfinite(tau), ErrorCode::kConfig, "tau must be finite");
  require(k_early >= 0 && k_late >= 0, ErrorCode::kConfig, "K_e and K_l must be >= 0");
  require(t_switch_reference > 0 && t_switch >= 0 && t_switch <= t_switch_reference,
          ErrorCode::kConfig, "T_s must lie in [0, T]");
}

int ClassifierGuidanceConfig::iterations(int t, const NoiseSchedule& s) const {
  if (t_switch == 0) return k_early;
  const int ts = s.scaled_timestep(t_switch, t_switch_reference);
  return t > ts ? k_early : k_late;
}

StyleDistance::StyleDistance(const Codec& codec, const Oracle& oracle, const Tensor& style_frames)
    : codec_(&codec), oracle_(&oracle), target_(oracle.features(style_frames)) {}

Var StyleDistance::on_frames(num::Tape& tape, Var frames) const {
  num::Bound op(tape, oracle_->params(), false);
  Var f = oracle_->features(op, frames);
  require(f.shape() == target_.shape(), ErrorCode::kShapeMismatch,
          "style distance batch " + num::to_string(f.shape()) + " vs reference " +
              num::to_string(target_.shape()));
  return num::sum_last(num::abs(num::sub(f, tape.constant(target_))));
}

Var StyleDistance::on_latent(num::Tape& tape, Var z0_hat) const {
  num::Bound cp(tape, codec_->params(), false);
  return on_frames(tape, codec_->decode(cp, z0_hat));
}

namespace {
std::vector<double> to_doubles(const Tensor& t) {
  return {t.data().begin(), t.data().end()};
}
}  // namespace

std::vector<double> StyleDistance::of_latent(const Tensor& z0_hat) const {
  num::Tape tape;
  return to_doubles(on_latent(tape, tape.constant(z0_hat)).value());
}

std::vector<double> StyleDistance::of_frames(const Tensor& frames) const {
  num::Tape tape;
  return to_doubles(on_frames(tape, tape.constant(frames)).value());
}

namespace {

// z0_hat = (z_t - sqrt(1 - ab) eps) / sqrt(ab) on the tape.
Var clean_latent(Var zt, Var eps, int t, const NoiseSchedule& s) {
  const double ab = s.alpha_bar(t);
  return num::scale(num::sub(zt, num::scale(eps, static_cast<float>(std::sqrt(1.0 - ab)))),
                    static_cast<float>(1.0 / std::sqrt(ab)));
}

}  // namespace

num::Program StyleDistance::clean_prediction_program(const Tensor& eps, int t,
                                                     const NoiseSchedule& s) const {
  require(t >= 1 && t <= s.timesteps(), ErrorCode::kInvalidArgument, "t out of range");
  return num::Program({{"z_t", eps.shape()}},
                      [this, eps, t, &s](num::Tape& tape, const num::NamedVars& in) {
                        Var g = on_latent(tape, clean_latent(in.at("z_t"),
                                                             tape.constant(eps), t, s));
                        return num::NamedVars{{"G", num::sum(g)}};
                      });
}

Tensor style_gradient(const Tensor& z_t, const Tensor& eps, int t, const NoiseSchedule& s,
                      const StyleDistance& g, GradMode mode, const EpsFunction* network,
                      std::vector<double>* values) {
  require(z_t.shape() == eps.shape(), ErrorCode::kShapeMismatch, "z_t and eps differ in shape");
  require(t >= 1 && t <= s.timesteps(), ErrorCode::kInvalidArgument, "t out of range");
  num::Tape tape;
  Var z = tape.parameter(z_t);
  Var e;
  if (mode == GradMode::kCleanPrediction) {
    e = tape.constant(eps);
  } else {
    require(network != nullptr, ErrorCode::kInvalidArgument,
            "through-network guidance needs the eps network");
    Var net = (*network)(tape, z);
    // Keep the value equal to `eps` while differentiating through the net.
    Tensor offset(eps.shape());
    for (std::size_t i = 0; i < eps.size(); ++i) offset[i] = eps[i] - net.value()[i];
    e = num::add(net, tape.constant(offset));
  }
  Var rows = g.on_latent(tape, clean_latent(z, e, t, s));
  if (values) *values = to_doubles(rows.value());
  tape.backward(num::sum(rows));
  Tensor grad = tape.grad(z);
  require(grad.all_finite(), ErrorCode::kNonFinite,
          "style guidance gradient is non-finite at t=" + std::to_string(t));
  return grad;
}

Tensor apply_classifier_guidance(const Tensor& z_t, int t, const Tensor& eps,
                                 const StyleDistance& g, const ClassifierGuidanceConfig& cfg,
                                 const NoiseSchedule& s, const EpsFunction* network,
                                 GuidanceTrace* trace) {
  cfg.validate();
  const int k = cfg.iterations(t, s);
  if (trace) trace->g_history.clear();
  if (k == 0 || cfg.tau == 0.0f) return eps;
  const float step = cfg.sign == GuidanceSign::kDescent ? -cfg.tau : cfg.tau;
  Tensor cur = eps;
  for (int i = 0; i < k; ++i) {
    std::vector<double> values;
    const Tensor grad = style_gradient(z_t, cur, t, s, g, cfg.grad_mode, network, &values);
    if (trace) trace->g_history.push_back(std::move(values));
    for (std::size_t j = 0; j < cur.size(); ++j) cur[j] += step * grad[j];
  }
  if (trace) {
    // Same float path as the gradient evaluations, so histories compare cleanly.
    num::Tape tape;
    Var rows = g.on_latent(tape, clean_latent(tape.constant(z_t), tape.constant(cur), t, s));
    trace->g_history.push_back(to_doubles(rows.value()));
  }
  return cur;
}

}  // namespace smoodi
