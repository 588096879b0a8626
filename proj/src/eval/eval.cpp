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

#include "smoodi/eval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "smoodi/error.hpp"
#include "smoodi/sampler.hpp"

namespace smoodi {

using num::Tensor;

double recognition_accuracy(std::span<const int> predicted, std::span<const int> intended) {
  require(!intended.empty() && predicted.size() == intended.size(), ErrorCode::kInvalidArgument,
          "recognition accuracy needs a non-empty, aligned label set");
  std::size_t ok = 0;
  for (std::size_t i = 0; i < intended.size(); ++i) ok += predicted[i] == intended[i];
  return static_cast<double>(ok) / static_cast<double>(intended.size());
}

double recognition_accuracy(const Oracle& oracle, const Tensor& frames,
                            std::span<const int> intended) {
  return recognition_accuracy(oracle.classify(frames), intended);
}

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Mat to_matrix(const Tensor& t) {
  require(t.rank() == 2, ErrorCode::kShapeMismatch, "feature sets must be [n, k]");
  Mat m(t.dim(0), t.dim(1));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = t[static_cast<std::size_t>(i * m.cols() + j)];
  return m;
}

void moments(const Mat& x, Vec& mu, Mat& cov) {
  mu = x.colwise().mean();
  const Mat c = x.rowwise() - mu.transpose();
  cov = (c.transpose() * c) / static_cast<double>(x.rows() - 1);
}

// Symmetric PSD square root; tiny negative eigenvalues from rounding clamp to 0.
Mat sqrt_psd(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

bool singular(const Mat& cov) {
  Eigen::SelfAdjointEigenSolver<Mat> es(cov, Eigen::EigenvaluesOnly);
  const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
  return es.eigenvalues().minCoeff() <= 1e-12 * std::max(top, 1.0);
}

}  // namespace

FfdResult ffd(const Tensor& feats_a, const Tensor& feats_b) {
  const Mat a = to_matrix(feats_a), b = to_matrix(feats_b);
  require(a.cols() == b.cols(), ErrorCode::kShapeMismatch, "feature dimensions differ");
  require(a.rows() >= 2 && b.rows() >= 2, ErrorCode::kInvalidArgument,
          "each feature set needs at least two rows");
  Vec mu_a, mu_b;
  Mat sa, sb;
  moments(a, mu_a, sa);
  moments(b, mu_b, sb);
  FfdResult r;
  if (singular(sa) || singular(sb)) {
    const Mat eye = Mat::Identity(a.cols(), a.cols());
    sa += 1e-6 * eye;
    sb += 1e-6 * eye;
    r.regularized = true;
  }
  const Mat ra = sqrt_psd(sa);
  const Mat mid = ra * sb * ra;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (mid + mid.transpose()), Eigen::EigenvaluesOnly);
  const double cross = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  // Rounding can leave a tiny negative residue for identical inputs.
  r.value = std::max(0.0, (mu_a - mu_b).squaredNorm() + sa.trace() + sb.trace() - 2.0 * cross);
  return r;
}

double diversity(const Tensor& feats, int pairs, std::uint64_t seed) {
  require(feats.rank() == 2 && feats.dim(0) >= 2, ErrorCode::kInvalidArgument,
          "diversity needs at least two feature rows");
  require(pairs > 0, ErrorCode::kInvalidArgument, "diversity needs a positive pair count");
  const auto n = static_cast<std::size_t>(feats.dim(0));
  const auto k = static_cast<std::size_t>(feats.dim(1));
  num::Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  double acc = 0;
  for (int p = 0; p < pairs; ++p) {
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    while (j == i) j = pick(rng);
    double d2 = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double d = static_cast<double>(feats[i * k + c]) - feats[j * k + c];
      d2 += d * d;
    }
    acc += std::sqrt(d2);
  }
  return acc / pairs;
}

double kinematic_violation(const Tensor& frames, double threshold) {
  const Tensor batch = frames.rank() == 2 ? frames.reshaped({1, frames.dim(0), frames.dim(1)})
                                          : frames;
  require(batch.rank() == 3 && batch.dim(1) == motion::kFrames && batch.dim(2) == motion::kChannels,
          ErrorCode::kShapeMismatch, "kinematic_violation expects [B, 64, 8] frames");
  std::size_t bad = 0, total = 0;
  for (std::int64_t b = 0; b < batch.dim(0); ++b) {
    for (float r : motion::velocity_residuals(batch.rows(b, 1).reshaped({motion::kFrames,
                                                                         motion::kChannels}))) {
      bad += r > threshold;
      ++total;
    }
  }
  return static_cast<double>(bad) / static_cast<double>(total);
}

EvalReport run_eval(const ModelSet& m, std::span<const motion::MotionSequence> refs,
                    const EvalConfig& cfg) {
  require(cfg.samples >= 2 && cfg.batch >= 1, ErrorCode::kConfig,
          "evaluation needs at least two samples and a positive batch");
  require(!refs.empty(), ErrorCode::kInvalidArgument, "no style references to draw from");
  num::Rng rng(cfg.seed);
  const auto contents = motion::all_contents();
  std::uniform_int_distribution<std::size_t> pick_c(0, contents.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_r(0, refs.size() - 1);

  struct Pair {
    int content;
    std::size_t ref;
    std::uint64_t sample_seed, truth_seed;
  };
  std::vector<Pair> pairs;
  for (int i = 0; i < cfg.samples; ++i) {
    Pair p{};
    p.content = static_cast<int>(contents[pick_c(rng)]);
    p.ref = pick_r(rng);
    p.sample_seed = rng();
    p.truth_seed = rng();
    pairs.push_back(p);
  }

  EvalReport rep;
  rep.samples = cfg.samples;
  std::vector<Tensor> gen_frames, truth;
  std::vector<double> g_final;
  for (std::size_t lo = 0; lo < pairs.size(); lo += static_cast<std::size_t>(cfg.batch)) {
    const std::size_t hi = std::min(pairs.size(), lo + static_cast<std::size_t>(cfg.batch));
    SampleRequest req;
    req.weights = cfg.weights;
    req.guidance = cfg.guidance;
    req.steps = cfg.steps;
    req.use_adaptor = cfg.use_adaptor;
    std::vector<motion::MotionSequence> style_seqs;
    for (std::size_t i = lo; i < hi; ++i) {
      req.content.push_back(pairs[i].content);
      req.seeds.push_back(pairs[i].sample_seed);
      style_seqs.push_back(refs[pairs[i].ref]);
    }
    const Tensor style = stack_normalized(style_seqs, m.norm);
    if (cfg.use_style) req.style = style;
    SampleOutput out = sample(req, m);
    // G against the reference is reported even when no style was used.
    std::vector<double> g = cfg.use_style ? out.g_final
                                          : StyleDistance(m.codec, m.style_oracle, style)
                                                .of_frames(out.frames);
    g_final.insert(g_final.end(), g.begin(), g.end());
    gen_frames.push_back(std::move(out.frames));
  }
  for (const auto& p : pairs) {
    truth.push_back(m.norm.normalize(
        motion::cross_synthesize(motion::content_from_id(p.content), refs[p.ref].style,
                                 p.truth_seed).frames));
  }

  Tensor frames = gen_frames.size() == 1 ? gen_frames.front() : [&] {
    std::vector<Tensor> rows;
    for (const auto& g : gen_frames)
      for (std::int64_t r = 0; r < g.dim(0); ++r)
        rows.push_back(g.rows(r, 1).reshaped({motion::kFrames, motion::kChannels}));
    return num::stack(rows);
  }();
  const Tensor truth_frames = num::stack(truth);

  const auto ps = m.eval_style_oracle.classify(frames);
  const auto pg = m.style_oracle.classify(frames);
  const auto pc = m.content_oracle.classify(frames);
  std::vector<int> want_s, want_c;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const int s = static_cast<int>(refs[pairs[i].ref].style);
    want_s.push_back(s);
    want_c.push_back(pairs[i].content);
    rep.rows.push_back({pairs[i].content, s, ps[i], pg[i], pc[i], g_final[i]});
  }
  rep.sra = recognition_accuracy(ps, want_s);
  rep.sra_guide = recognition_accuracy(pg, want_s);
  rep.cra = recognition_accuracy(pc, want_c);

  const Tensor feats = m.eval_style_oracle.features(frames);
  const FfdResult f = ffd(feats, m.eval_style_oracle.features(truth_frames));
  rep.ffd = f.value;
  rep.ffd_regularized = f.regularized;
  rep.diversity = diversity(feats, cfg.diversity_pairs, cfg.seed ^ 0xd1ce5eedULL);
  rep.kinematic_violation = kinematic_violation(m.norm.denormalize(frames), cfg.kinematic_threshold);
  return rep;
}

void write_eval_report(const std::filesystem::path& path, const EvalReport& r,
                       const std::vector<std::string>& echo) {
  std::ofstream os(path);
  require(os.good(), ErrorCode::kIo, "cannot write " + path.string());
  os.precision(9);
  os << "samples=" << r.samples << "\n"
     << "sra=" << r.sra << "\n"
     << "sra_guidance_oracle=" << r.sra_guide << "\n"
     << "cra=" << r.cra << "\n"
     << "ffd=" << r.ffd << "\n"
     << "ffd_regularized=" << (r.ffd_regularized ? 1 : 0) << "\n"
     << "diversity=" << r.diversity << "\n"
     << "kinematic_violation=" << r.kinematic_violation << "\n";
  for (const auto& line : echo) os << line << "\n";
  require(os.good(), ErrorCode::kIo, "failed writing " + path.string());
}

void write_eval_samples(const std::filesystem::path& path, const EvalReport& r) {
  std::ofstream os(path);
  require(os.good(), ErrorCode::kIo, "cannot write " + path.string());
  os.precision(9);
  os << "content,style,predicted_style,predicted_content,G_final\n";
  for (const auto& row : r.rows)
    os << motion::name(motion::content_from_id(row.content)) << ','
       << motion::name(motion::style_from_id(row.style)) << ','
       << motion::name(motion::style_from_id(row.predicted_style)) << ','
       << motion::name(motion::content_from_id(row.predicted_content)) << ',' << row.g_final
       << '\n';
  require(os.good(), ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace smoodi
