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

// Reverse-mode differentiation over a define-by-run tape.
//
// Every forward op evaluates eagerly and, when any input requires a
// gradient, records a closure that maps the output gradient onto its inputs.
// A Tape is single-threaded; independent tapes may run concurrently because
// all parameter tensors are copied in and never written back.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "smoodi/numerics/tensor.hpp"

namespace smoodi::num {

class Tape;

class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::uint32_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Leaf that accumulates a gradient.
  Var parameter(Tensor value);

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  const Tensor& value(std::uint32_t id) const { return nodes_[id].value; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Seeds d(out)/d(out) = 1 for a single-element output and propagates.
  void backward(Var scalar_output);

  /// Accumulated gradient; zeros when the node was never reached.
  Tensor grad(Var v) const;

  // Op-author interface.
  Var record(Tensor value, std::span<const Var> inputs, Backward backward);
  /// Gradient buffer of node `id`, allocated on first use. Returns nullptr
  /// for nodes that do not require gradients.
  Tensor* grad_buffer(std::uint32_t id);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

// --- ops ------------------------------------------------------------------
// Broadcasting in add/sub/mul: the second operand's shape must equal the
// first's, be a suffix of it, or be a scalar.

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, float s);
Var shift(Var a, float c);
Var square(Var a);
Var abs(Var a);
Var relu(Var a);
Var gelu(Var a);

/// x[..., K] times w[K, N].
Var matmul(Var x, Var w);
/// Batched a[..., M, K] times b[..., K, N] (or b[..., N, K] transposed).
Var bmm(Var a, Var b, bool transpose_b = false);

/// Normalizes over the last axis, then applies gain and bias of that size.
Var layer_norm(Var x, Var gain, Var bias, float eps = 1e-5f);
/// Softmax over the last axis.
Var softmax(Var x);

/// Rows of table[V, D] picked by ids; result [ids.size(), D].
Var embedding(Var table, std::span<const int> ids);
Var concat(std::span<const Var> parts, std::size_t axis);
Var slice(Var x, std::size_t axis, std::int64_t begin, std::int64_t length);
Var reshape(Var x, Shape shape);
Var permute(Var x, std::span<const std::size_t> perm);

Var sum(Var x);
Var mean(Var x);
/// Mean over one axis; the axis is removed.
Var mean_axis(Var x, std::size_t axis);
/// Sum over the last axis; the axis is removed.
Var sum_last(Var x);

/// Mean softmax cross-entropy of logits[B, C] against integer labels.
Var cross_entropy(Var logits, std::span<const int> labels);
/// mean((a - b)^2) over all elements.
Var mse(Var a, Var b);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator*(Var a, float s) { return scale(a, s); }
inline Var operator*(float s, Var a) { return scale(a, s); }

}  // namespace smoodi::num
