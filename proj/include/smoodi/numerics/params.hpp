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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "smoodi/numerics/autodiff.hpp"

namespace smoodi::num {

using Rng = std::mt19937_64;

/// Ordered, named parameter tensors of one network.
class ParameterStore {
 public:
  void add(std::string name, Tensor value);
  bool contains(std::string_view name) const;
  const Tensor& get(std::string_view name) const;
  Tensor& mutable_get(std::string_view name);

  const std::vector<std::pair<std::string, Tensor>>& entries() const noexcept {
    return entries_;
  }
  std::vector<std::string> names() const;
  std::size_t parameter_count() const;

  /// FNV-1a 64 over the blob encoding, as 16 hex digits.
  std::string checksum() const;

  /// Copies every tensor whose name starts with `from` under the `to` prefix.
  void copy_prefixed(const ParameterStore& src, std::string_view from,
                     std::string_view to);

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Lazily binds parameters onto a tape: as trainable leaves or constants.
class Bound {
 public:
  Bound(Tape& tape, const ParameterStore& store, bool trainable)
      : tape_(&tape), store_(&store), trainable_(trainable) {}

  Var operator[](std::string_view name) const;
  Tape& tape() const { return *tape_; }

  /// Gradients for every parameter bound so far (zeros for unreached ones).
  std::map<std::string, Tensor> gradients() const;

 private:
  Tape* tape_;
  const ParameterStore* store_;
  bool trainable_;
  mutable std::map<std::string, Var, std::less<>> cache_;
};

// --- blob format ------------------------------------------------------------
// Per tensor: u32 LE name length, UTF-8 name, u32 LE rank, u32 LE dims,
// raw f32 LE payload.

void write_tensor_record(std::ostream& os, const std::string& name,
                         const Tensor& t);
/// False on clean end of stream; throws on truncated records.
bool read_tensor_record(std::istream& is, std::string& name, Tensor& t);

std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string to_hex(std::uint64_t v);

/// A checkpoint file: one UTF-8 header line, then tensor records.
struct Checkpoint {
  std::string header;
  ParameterStore params;
};

/// Writes to a temporary sibling and renames over the target.
void save_checkpoint(const std::filesystem::path& path,
                     const std::string& header, const ParameterStore& params);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Value of a `key=value` token in a header line, or empty.
std::string header_field(std::string_view header, std::string_view key);

// --- optimizer -------------------------------------------------------------

struct AdamWConfig {
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
  float weight_decay = 0.01f;
};

/// Adam with decoupled weight decay over a named subset of a store.
class AdamW {
 public:
  AdamW(ParameterStore& params, std::vector<std::string> names,
        AdamWConfig config);

  /// Missing gradients count as zero.
  void step(const std::map<std::string, Tensor>& grads);

  const std::vector<std::string>& parameter_names() const noexcept {
    return names_;
  }
  void set_lr(float lr) { config_.lr = lr; }
  std::int64_t steps() const noexcept { return t_; }

 private:
  ParameterStore* params_;
  std::vector<std::string> names_;
  AdamWConfig config_;
  std::vector<Tensor> m_, v_;
  std::int64_t t_ = 0;
};

/// Cosine decay from `base` to `floor_frac * base` over `total` steps.
float cosine_lr(float base, std::int64_t step, std::int64_t total,
                float floor_frac = 0.1f);

/// A seeded shuffle of [0, n) cut into batches of at most `batch`.
std::vector<std::vector<std::int64_t>> shuffled_batches(std::size_t n,
                                                        std::size_t batch,
                                                        Rng& rng);

}  // namespace smoodi::num
