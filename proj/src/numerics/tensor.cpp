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

#include "smoodi/numerics/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "smoodi/error.hpp"

namespace smoodi::num {

std::int64_t numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) {
    require(d > 0, ErrorCode::kShapeMismatch,
            "non-positive dimension in shape " + to_string(shape));
    n *= d;
  }
  return n;
}

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape)
    : shape_(std::move(shape)),
      data_(static_cast<std::size_t>(numel(shape_)), 0.0f) {}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  require(static_cast<std::int64_t>(data_.size()) == numel(shape_),
          ErrorCode::kShapeMismatch,
          "tensor data length " + std::to_string(data_.size()) +
              " does not match shape " + to_string(shape_));
}

Tensor Tensor::full(Shape shape, float value) {
  Tensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

Tensor Tensor::vector(std::initializer_list<float> values) {
  return Tensor({static_cast<std::int64_t>(values.size())},
                std::vector<float>(values));
}

Tensor Tensor::vector(std::vector<float> values) {
  auto n = static_cast<std::int64_t>(values.size());
  return Tensor({n}, std::move(values));
}

float Tensor::item() const {
  require(data_.size() == 1, ErrorCode::kShapeMismatch,
          "item() on tensor of shape " + to_string(shape_));
  return data_[0];
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](float v) { return std::isfinite(v); });
}

Tensor Tensor::reshaped(Shape shape) const& {
  return Tensor(std::move(shape), data_);
}

Tensor Tensor::reshaped(Shape shape) && {
  return Tensor(std::move(shape), std::move(data_));
}

Tensor Tensor::rows(std::int64_t begin, std::int64_t count) const {
  require(rank() >= 1 && begin >= 0 && count > 0 && begin + count <= dim(0),
          ErrorCode::kShapeMismatch, "row range out of bounds");
  Shape s = shape_;
  s[0] = count;
  const std::size_t stride = data_.size() / static_cast<std::size_t>(dim(0));
  std::vector<float> out(data_.begin() + begin * stride,
                         data_.begin() + (begin + count) * stride);
  return Tensor(std::move(s), std::move(out));
}

Tensor take_rows(const Tensor& t, std::span<const std::int64_t> index) {
  require(t.rank() >= 1, ErrorCode::kShapeMismatch, "take_rows of a scalar");
  Shape s = t.shape();
  const std::int64_t n = s[0];
  const std::size_t row = t.size() / static_cast<std::size_t>(std::max<std::int64_t>(n, 1));
  s[0] = static_cast<std::int64_t>(index.size());
  Tensor out(s);
  for (std::size_t i = 0; i < index.size(); ++i) {
    require(index[i] >= 0 && index[i] < n, ErrorCode::kInvalidArgument, "take_rows index out of range");
    std::copy_n(t.raw() + static_cast<std::size_t>(index[i]) * row, row, out.raw() + i * row);
  }
  return out;
}

Tensor stack(std::span<const Tensor> parts) {
  require(!parts.empty(), ErrorCode::kInvalidArgument, "stack of nothing");
  Shape s = parts.front().shape();
  s.insert(s.begin(), static_cast<std::int64_t>(parts.size()));
  std::vector<float> data;
  data.reserve(parts.size() * parts.front().size());
  for (const auto& p : parts) {
    require(p.shape() == parts.front().shape(), ErrorCode::kShapeMismatch,
            "stack of mismatched shapes");
    data.insert(data.end(), p.data().begin(), p.data().end());
  }
  return Tensor(std::move(s), std::move(data));
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() &&
         std::memcmp(a.raw(), b.raw(), a.size() * sizeof(float)) == 0;
}

float l2_norm(std::span<const float> v) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * x;
  return static_cast<float>(std::sqrt(s));
}

float max_abs_diff(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), ErrorCode::kShapeMismatch,
          "max_abs_diff shape mismatch");
  float m = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace smoodi::num
