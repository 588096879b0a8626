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

#include "smoodi/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "smoodi/error.hpp"

namespace smoodi {

using num::Bound;
using num::Tape;
using num::Tensor;
using num::Var;

Tensor initial_noise(std::span<const std::uint64_t> seeds, int latent_dim) {
  Tensor z({static_cast<std::int64_t>(seeds.size()), latent_dim});
  for (std::size_t r = 0; r < seeds.size(); ++r) {
    num::Rng rng(seeds[r]);
    std::normal_distribution<float> gauss(0.0f, 1.0f);
    for (int j = 0; j < latent_dim; ++j) z[r * static_cast<std::size_t>(latent_dim) + j] = gauss(rng);
  }
  return z;
}

namespace {

bool styled(const ModelSet& m, const Tensor* emb, bool use_adaptor) {
  return emb != nullptr && use_adaptor && m.adaptor.has_value();
}

Tensor repeat_rows(const Tensor& row, std::int64_t n) {
  std::vector<Tensor> parts(static_cast<std::size_t>(n), row.reshaped({row.dim(1)}));
  return num::stack(parts);
}

// One branch on a tape. `emb` null means the plain base model.
Var branch(Tape& tape, const ModelSet& m, Var z, std::span<const int> t,
           std::span<const int> content, const Tensor* emb) {
  Bound bp(tape, m.base.params(), false);
  if (emb == nullptr) return m.base.predict(bp, z, t, content);
  Bound ap(tape, m.adaptor->params(), false);
  return stylized_predict(m.base, bp, *m.adaptor, ap, z, t, content, tape.constant(*emb));
}

Tensor eval_branch(const ModelSet& m, const Tensor& z, std::span<const int> t,
                   std::span<const int> content, const Tensor* emb) {
  Tape tape;
  return branch(tape, m, tape.constant(z), t, content, emb).value();
}

struct Embeddings {
  Tensor style;
  Tensor null;
};

}  // namespace

Tensor guided_eps(const ModelSet& m, const Tensor& z, int t, std::span<const int> content,
                  const Tensor* style_embedding, const GuidanceWeights& w, bool use_adaptor) {
  const auto b = static_cast<std::size_t>(z.dim(0));
  require(content.size() == b, ErrorCode::kShapeMismatch, "one content label per row required");
  const std::vector<int> ts(b, t);
  const std::vector<int> null_c(b, kNullContent);
  if (!styled(m, style_embedding, use_adaptor)) {
    const Tensor u = eval_branch(m, z, ts, null_c, nullptr);
    const Tensor c = eval_branch(m, z, ts, content, nullptr);
    return cfg_combine(u, c, c, w);
  }
  const Tensor null = repeat_rows(m.adaptor->null_style(), z.dim(0));
  const Tensor u = eval_branch(m, z, ts, null_c, &null);
  const Tensor c = eval_branch(m, z, ts, content, &null);
  const Tensor s = eval_branch(m, z, ts, content, style_embedding);
  return cfg_combine(u, c, s, w);
}

namespace {

// The same combination as guided_eps, differentiable in z.
EpsFunction eps_function(const ModelSet& m, int t, std::span<const int> content,
                         const Tensor* emb, const Tensor* null, const GuidanceWeights& w) {
  return [&m, t, content, emb, null, w](Tape& tape, Var z) {
    const auto b = static_cast<std::size_t>(z.shape()[0]);
    const std::vector<int> ts(b, t);
    const std::vector<int> null_c(b, kNullContent);
    Var u = branch(tape, m, z, ts, null_c, null);
    Var c = branch(tape, m, z, ts, content, null);
    Var s = emb ? branch(tape, m, z, ts, content, emb) : c;
    return u + w.w_c * (c - u) + w.w_s * (s - c);
  };
}

std::string trace_line(int t, double g, const Tensor& eps) {
  const auto b = eps.dim(0), d = eps.dim(1);
  double norm = 0;
  for (std::int64_t r = 0; r < b; ++r)
    norm += num::l2_norm(eps.data().subspan(static_cast<std::size_t>(r * d),
                                            static_cast<std::size_t>(d)));
  char buf[96];
  std::snprintf(buf, sizeof buf, "step=%d G=%.6g eps_norm=%.6g", t, g,
                norm / static_cast<double>(b));
  return buf;
}

double mean(const std::vector<double>& v) {
  double acc = 0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

}  // namespace

SampleOutput sample(const SampleRequest& req, const ModelSet& m) {
  req.guidance.validate();
  require(req.steps >= 1 && req.steps <= m.schedule.timesteps(), ErrorCode::kInvalidArgument,
          "steps must lie in [1, T]");
  const int d = m.base.config().latent_dim;
  Tensor z = req.z_T ? *req.z_T : initial_noise(req.seeds, d);
  require(z.rank() == 2 && z.dim(1) == d, ErrorCode::kShapeMismatch,
          "z_T must be [B, " + std::to_string(d) + "]");
  const auto b = static_cast<std::size_t>(z.dim(0));
  require(b > 0 && req.content.size() == b, ErrorCode::kShapeMismatch,
          "need one content label (and one seed) per row");
  for (int c : req.content)
    require(c >= 0 && c <= kNullContent, ErrorCode::kInvalidArgument, "content id out of range");

  std::optional<Embeddings> emb;
  std::optional<StyleDistance> distance;
  if (req.style) {
    require(req.style->rank() == 3 && static_cast<std::size_t>(req.style->dim(0)) == b,
            ErrorCode::kShapeMismatch, "style reference must be [B, 64, 8]");
    distance.emplace(m.codec, m.style_oracle, *req.style);
    if (req.use_adaptor && m.adaptor)
      emb = Embeddings{m.adaptor->encode_style(*req.style),
                       repeat_rows(m.adaptor->null_style(), z.dim(0))};
  }
  const Tensor* style_emb = emb ? &emb->style : nullptr;
  const Tensor* null_emb = emb ? &emb->null : nullptr;

  SampleOutput out;
  const auto steps = m.schedule.inference_steps(req.steps);
  for (std::size_t i = steps.size(); i-- > 0;) {
    const int t = steps[i];
    const int t_prev = i > 0 ? steps[i - 1] : 0;
    try {
      Tensor eps = guided_eps(m, z, t, req.content, style_emb, req.weights, req.use_adaptor);
      if (distance) {
        const EpsFunction net = eps_function(m, t, req.content, style_emb, null_emb, req.weights);
        eps = apply_classifier_guidance(z, t, eps, *distance, req.guidance, m.schedule, &net);
      }
      require(eps.all_finite(), ErrorCode::kNonFinite, "eps is non-finite");
      if (req.trace) {
        const double g = distance
                             ? mean(distance->of_latent(predict_clean_latent(z, eps, t, m.schedule)))
                             : std::numeric_limits<double>::quiet_NaN();
        out.trace.push_back(trace_line(t, g, eps));
      }
      z = ddim_step(z, eps, t, t_prev, m.schedule);
      require(z.all_finite(), ErrorCode::kNonFinite, "latent is non-finite");
    } catch (const Error& e) {
      throw Error(e.code(), "sampling step t=" + std::to_string(t) + ": " + e.what());
    }
  }
  out.z0 = z;
  out.frames = m.codec.decode(z);
  if (distance) out.g_final = distance->of_frames(out.frames);
  return out;
}

Tensor ddim_invert(const ModelSet& m, const Tensor& frames, std::span<const int> content,
                   int steps, float w_c) {
  require(steps >= 1 && steps <= m.schedule.timesteps(), ErrorCode::kInvalidArgument,
          "steps must lie in [1, T]");
  Tensor z = m.codec.encode(frames);
  require(static_cast<std::size_t>(z.dim(0)) == content.size(), ErrorCode::kShapeMismatch,
          "one content label per inverted sequence required");
  const GuidanceWeights w{w_c, 0.0f};
  int t = 0;
  for (int t_next : m.schedule.inference_steps(steps)) {
    // eps is evaluated at the target level: the denoiser is undefined at t = 0.
    const Tensor eps = guided_eps(m, z, t_next, content, nullptr, w, false);
    z = ddim_invert_step(z, eps, t, t_next, m.schedule);
    require(z.all_finite(), ErrorCode::kNonFinite,
            "inversion produced a non-finite latent at t=" + std::to_string(t_next));
    t = t_next;
  }
  return z;
}

SampleOutput style_transfer(const ModelSet& m, const Tensor& content_frames,
                            std::span<const int> content, const Tensor& style_frames,
                            const TransferConfig& cfg) {
  SampleRequest req;
  req.content.assign(content.begin(), content.end());
  req.style = style_frames;
  req.weights = cfg.weights;
  req.guidance = cfg.guidance;
  req.steps = cfg.steps;
  req.z_T = ddim_invert(m, content_frames, content, cfg.steps, cfg.inversion_w_c);
  return sample(req, m);
}

}  // namespace smoodi
