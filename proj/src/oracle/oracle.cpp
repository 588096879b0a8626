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

#include "smoodi/oracle.hpp"

#include <cmath>

#include "smoodi/error.hpp"
#include "smoodi/motion.hpp"
#include "smoodi/numerics/layers.hpp"

namespace smoodi {

using num::Bound;
using num::Tensor;
using num::Var;

std::string_view name(OracleKind k) { return k == OracleKind::kStyle ? "style" : "content"; }

Oracle::Oracle(const OracleConfig& config, num::Rng& rng) : config_(config) {
  require(config.feature_dim > 0 && config.d_model % config.heads == 0, ErrorCode::kConfig,
          "invalid oracle configuration");
  num::init_patch_encoder(params_, "enc", motion::kFrames, motion::kChannels, config.patch,
                          config.d_model, config.ffn, rng);
  num::init_linear(params_, "feat", config.d_model, config.feature_dim, rng);
  num::init_linear(params_, "cls", config.feature_dim, classes(), rng);
}

int Oracle::classes() const noexcept {
  return config_.kind == OracleKind::kStyle ? motion::kNumStyles : motion::kNumContents;
}

Var Oracle::features(const Bound& p, Var frames) const {
  return num::gelu(num::linear(p, "feat", num::patch_encoder(p, "enc", frames, config_.patch,
                                                             config_.heads)));
}

Var Oracle::head(const Bound& p, Var f) const { return num::linear(p, "cls", f); }

Var Oracle::logits(const Bound& p, Var frames) const { return head(p, features(p, frames)); }

Tensor Oracle::features(const Tensor& frames) const {
  num::Tape t;
  Bound p(t, params_, false);
  return features(p, t.constant(frames)).value();
}

Tensor Oracle::logits(const Tensor& frames) const {
  num::Tape t;
  Bound p(t, params_, false);
  return logits(p, t.constant(frames)).value();
}

std::vector<int> argmax_rows(const Tensor& logits) {
  require(logits.rank() == 2, ErrorCode::kShapeMismatch, "argmax_rows expects [B, C]");
  const auto b = static_cast<std::size_t>(logits.dim(0));
  const auto c = static_cast<std::size_t>(logits.dim(1));
  std::vector<int> out(b);
  for (std::size_t i = 0; i < b; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j)
      if (logits[i * c + j] > logits[i * c + best]) best = j;
    out[i] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> Oracle::classify(const Tensor& frames) const {
  return argmax_rows(logits(frames));
}

void Oracle::save(const std::filesystem::path& path, const std::string& extra) const {
  std::string header = "oracle v1 kind=" + std::string(name(config_.kind)) +
                       " seed=" + std::to_string(config_.seed) +
                       " frozen_checksum=" + params_.checksum() +
                       " d_model=" + std::to_string(config_.d_model) +
                       " heads=" + std::to_string(config_.heads) +
                       " ffn=" + std::to_string(config_.ffn) +
                       " patch=" + std::to_string(config_.patch) +
                       " feature_dim=" + std::to_string(config_.feature_dim);
  if (!extra.empty()) header += " " + extra;
  num::save_checkpoint(path, header, params_);
}

Oracle Oracle::load(const std::filesystem::path& path, std::string* header) {
  num::Checkpoint ck = num::load_checkpoint(path);
  require(ck.header.rfind("oracle v1 ", 0) == 0, ErrorCode::kFormat,
          path.string() + " is not an oracle checkpoint");
  require(ck.params.checksum() == num::header_field(ck.header, "frozen_checksum"),
          ErrorCode::kChecksumMismatch, "oracle parameters do not match their checksum");
  auto field = [&](const char* k) {
    const std::string v = num::header_field(ck.header, k);
    require(!v.empty(), ErrorCode::kFormat, std::string("oracle header lacks ") + k);
    return v;
  };
  Oracle o;
  const std::string kind = field("kind");
  require(kind == "style" || kind == "content", ErrorCode::kFormat, "bad oracle kind");
  o.config_.kind = kind == "style" ? OracleKind::kStyle : OracleKind::kContent;
  o.config_.seed = std::stoull(field("seed"));
  o.config_.d_model = std::stoi(field("d_model"));
  o.config_.heads = std::stoi(field("heads"));
  o.config_.ffn = std::stoi(field("ffn"));
  o.config_.patch = std::stoi(field("patch"));
  o.config_.feature_dim = std::stoi(field("feature_dim"));
  o.params_ = std::move(ck.params);
  if (header) *header = ck.header;
  return o;
}

double accuracy(const Oracle& oracle, const Tensor& frames, std::span<const int> labels) {
  require(!labels.empty(), ErrorCode::kInvalidArgument, "accuracy of an empty set");
  const auto pred = oracle.classify(frames);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) ok += pred[i] == labels[i];
  return static_cast<double>(ok) / static_cast<double>(labels.size());
}

Oracle train_oracle(const Tensor& frames, std::span<const int> labels, const OracleConfig& config,
                    OracleReport* report) {
  require(frames.rank() == 3 && static_cast<std::size_t>(frames.dim(0)) == labels.size(),
          ErrorCode::kShapeMismatch, "oracle training data must be [N, 64, 8] with N labels");
  num::Rng rng(config.seed);
  Oracle oracle(config, rng);
  for (int l : labels)
    require(l >= 0 && l < oracle.classes(), ErrorCode::kInvalidArgument, "label out of range");

  // Seeded 80/20 split.
  const std::size_t n = labels.size();
  auto order = num::shuffled_batches(n, n, rng).front();
  const std::size_t n_train = n - n / 5;
  std::vector<std::int64_t> tr(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::int64_t> te(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  auto gather_labels = [&](const std::vector<std::int64_t>& idx) {
    std::vector<int> out;
    for (auto i : idx) out.push_back(labels[static_cast<std::size_t>(i)]);
    return out;
  };
  const Tensor xtr = num::take_rows(frames, tr);
  const std::vector<int> ytr = gather_labels(tr);

  num::AdamW opt(oracle.mutable_params(), oracle.params().names(), {.lr = config.lr});
  const auto b = static_cast<std::size_t>(config.batch);
  const std::int64_t total = static_cast<std::int64_t>((n_train + b - 1) / b) * config.epochs;
  OracleReport rep;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double acc = 0;
    for (const auto& idx : num::shuffled_batches(n_train, b, rng)) {
      std::vector<int> y;
      for (auto i : idx) y.push_back(ytr[static_cast<std::size_t>(i)]);
      opt.set_lr(num::cosine_lr(config.lr, opt.steps(), total));
      num::Tape t;
      Bound p(t, oracle.params(), true);
      Var loss = num::cross_entropy(oracle.logits(p, t.constant(num::take_rows(xtr, idx))), y);
      require(std::isfinite(loss.value().item()), ErrorCode::kNonFinite,
              "oracle loss became non-finite");
      t.backward(loss);
      opt.step(p.gradients());
      acc += static_cast<double>(loss.value().item()) * static_cast<double>(idx.size());
    }
    rep.epoch_loss.push_back(acc / static_cast<double>(n_train));
  }
  rep.train_accuracy = accuracy(oracle, xtr, ytr);
  if (!te.empty()) {
    const auto yte = gather_labels(te);
    rep.heldout_accuracy = accuracy(oracle, num::take_rows(frames, te), yte);
  }
  if (report) *report = std::move(rep);
  return oracle;
}

}  // namespace smoodi
