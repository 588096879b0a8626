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

#include "smoodi/numerics/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kernels.hpp"
#include "smoodi/error.hpp"

namespace smoodi::num {

const Tensor& Var::value() const { return tape_->value(*this); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, false, {}});
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::parameter(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, true, {}});
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::record(Tensor value, std::span<const Var> inputs, Backward backward) {
  bool needs = false;
  for (const Var& v : inputs) {
    require(&v.tape() == this, ErrorCode::kInvalidArgument,
            "op mixes variables from different tapes");
    needs = needs || nodes_[v.id()].requires_grad;
  }
  nodes_.push_back(
      Node{std::move(value), {}, needs, needs ? std::move(backward) : Backward{}});
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Tensor* Tape::grad_buffer(std::uint32_t id) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return nullptr;
  if (n.grad.empty()) n.grad = Tensor::zeros(n.value.shape());
  return &n.grad;
}

void Tape::backward(Var out) {
  require(value(out).size() == 1, ErrorCode::kShapeMismatch,
          "gradient query on non-scalar output of shape " +
              to_string(value(out).shape()));
  Tensor* seed = grad_buffer(out.id());
  if (seed == nullptr) return;  // output does not depend on any parameter
  (*seed)[0] += 1.0f;
  for (std::size_t i = out.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, n.grad);
  }
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id()];
  if (n.grad.empty()) return Tensor::zeros(n.value.shape());
  return n.grad;
}

namespace {

Tape& tape_of(Var a) { return a.tape(); }

bool is_suffix(const Shape& big, const Shape& small) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

void check_broadcast(const Var& a, const Var& b, const char* op) {
  require(is_suffix(a.shape(), b.shape()), ErrorCode::kShapeMismatch,
          std::string(op) + ": cannot broadcast " + to_string(b.shape()) +
              " onto " + to_string(a.shape()));
}

// Reduces a gradient of a's shape onto b's (suffix) shape.
void accumulate_broadcast(const Tensor& g, Tensor& gb) {
  const std::size_t inner = gb.size();
  const std::size_t outer = g.size() / inner;
  for (std::size_t o = 0; o < outer; ++o) {
    const float* src = g.raw() + o * inner;
    for (std::size_t j = 0; j < inner; ++j) gb[j] += src[j];
  }
}

template <typename F, typename DF>
Var unary(Var a, F f, DF df) {
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  const Var in[] = {a};
  const auto ia = a.id();
  return tape_of(a).record(std::move(y), in,
                           [ia, df](Tape& t, const Tensor& g) {
                             Tensor* ga = t.grad_buffer(ia);
                             if (!ga) return;
                             const Tensor& x = t.value(ia);
                             for (std::size_t i = 0; i < x.size(); ++i)
                               (*ga)[i] += g[i] * df(x[i]);
                           });
}

std::vector<std::int64_t> strides_of(const Shape& s) {
  std::vector<std::int64_t> st(s.size(), 1);
  for (std::size_t i = s.size(); i-- > 1;) st[i - 1] = st[i] * s[i];
  return st;
}

}  // namespace

Var add(Var a, Var b) {
  check_broadcast(a, b, "add");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  Tensor out = x;
  const std::size_t inner = y.size();
  for (std::size_t o = 0; o < x.size(); o += inner)
    for (std::size_t j = 0; j < inner; ++j) out[o + j] += y[j];
  const Var in[] = {a, b};
  const auto ia = a.id(), ib = b.id();
  return tape_of(a).record(std::move(out), in,
                           [ia, ib](Tape& t, const Tensor& g) {
                             if (Tensor* ga = t.grad_buffer(ia))
                               for (std::size_t i = 0; i < g.size(); ++i)
                                 (*ga)[i] += g[i];
                             if (Tensor* gb = t.grad_buffer(ib))
                               accumulate_broadcast(g, *gb);
                           });
}

Var sub(Var a, Var b) {
  check_broadcast(a, b, "sub");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  Tensor out = x;
  const std::size_t inner = y.size();
  for (std::size_t o = 0; o < x.size(); o += inner)
    for (std::size_t j = 0; j < inner; ++j) out[o + j] -= y[j];
  const Var in[] = {a, b};
  const auto ia = a.id(), ib = b.id();
  return tape_of(a).record(std::move(out), in,
                           [ia, ib](Tape& t, const Tensor& g) {
                             if (Tensor* ga = t.grad_buffer(ia))
                               for (std::size_t i = 0; i < g.size(); ++i)
                                 (*ga)[i] += g[i];
                             if (Tensor* gb = t.grad_buffer(ib)) {
                               Tensor neg(g.shape());
                               for (std::size_t i = 0; i < g.size(); ++i)
                                 neg[i] = -g[i];
                               accumulate_broadcast(neg, *gb);
                             }
                           });
}

Var mul(Var a, Var b) {
  check_broadcast(a, b, "mul");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  Tensor out = x;
  const std::size_t inner = y.size();
  for (std::size_t o = 0; o < x.size(); o += inner)
    for (std::size_t j = 0; j < inner; ++j) out[o + j] *= y[j];
  const Var in[] = {a, b};
  const auto ia = a.id(), ib = b.id();
  return tape_of(a).record(
      std::move(out), in, [ia, ib](Tape& t, const Tensor& g) {
        const Tensor& x = t.value(ia);
        const Tensor& y = t.value(ib);
        const std::size_t inner = y.size();
        if (Tensor* ga = t.grad_buffer(ia))
          for (std::size_t o = 0; o < x.size(); o += inner)
            for (std::size_t j = 0; j < inner; ++j)
              (*ga)[o + j] += g[o + j] * y[j];
        if (Tensor* gb = t.grad_buffer(ib))
          for (std::size_t o = 0; o < x.size(); o += inner)
            for (std::size_t j = 0; j < inner; ++j)
              (*gb)[j] += g[o + j] * x[o + j];
      });
}

Var scale(Var a, float s) {
  return unary(a, [s](float v) { return v * s; }, [s](float) { return s; });
}

Var shift(Var a, float c) {
  return unary(a, [c](float v) { return v + c; }, [](float) { return 1.0f; });
}

Var square(Var a) {
  return unary(a, [](float v) { return v * v; },
               [](float v) { return 2.0f * v; });
}

Var abs(Var a) {
  // Subgradient 0 at the kink.
  return unary(a, [](float v) { return std::fabs(v); },
               [](float v) {
                 return v > 0.0f ? 1.0f : (v < 0.0f ? -1.0f : 0.0f);
               });
}

Var relu(Var a) {
  return unary(a, [](float v) { return v > 0.0f ? v : 0.0f; },
               [](float v) { return v > 0.0f ? 1.0f : 0.0f; });
}

Var gelu(Var a) {
  // tanh approximation
  constexpr float kC = 0.7978845608028654f;  // sqrt(2/pi)
  constexpr float kA = 0.044715f;
  return unary(
      a,
      [](float x) {
        return 0.5f * x * (1.0f + std::tanh(kC * (x + kA * x * x * x)));
      },
      [](float x) {
        const float u = kC * (x + kA * x * x * x);
        const float th = std::tanh(u);
        const float du = kC * (1.0f + 3.0f * kA * x * x);
        return 0.5f * (1.0f + th) + 0.5f * x * (1.0f - th * th) * du;
      });
}

Var matmul(Var x, Var w) {
  const Shape& xs = x.shape();
  const Shape& ws = w.shape();
  require(ws.size() == 2 && !xs.empty() && xs.back() == ws[0],
          ErrorCode::kShapeMismatch,
          "matmul: " + to_string(xs) + " x " + to_string(ws));
  const std::int64_t k = ws[0], n = ws[1];
  const std::int64_t m = static_cast<std::int64_t>(x.value().size()) / k;
  Shape os = xs;
  os.back() = n;
  Tensor out(os);
  kernels::gemm(x.value().raw(), w.value().raw(), out.raw(), m, k, n, false);
  const Var in[] = {x, w};
  const auto ix = x.id(), iw = w.id();
  return tape_of(x).record(
      std::move(out), in, [ix, iw, m, k, n](Tape& t, const Tensor& g) {
        if (Tensor* gx = t.grad_buffer(ix)) {
          std::vector<float> wt(static_cast<std::size_t>(k * n));
          kernels::transpose(t.value(iw).raw(), wt.data(), k, n);
          kernels::gemm(g.raw(), wt.data(), gx->raw(), m, n, k, true);
        }
        if (Tensor* gw = t.grad_buffer(iw))
          kernels::gemm_tn_acc(t.value(ix).raw(), g.raw(), gw->raw(), m, k, n);
      });
}

Var bmm(Var a, Var b, bool transpose_b) {
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  require(as.size() >= 2 && as.size() == bs.size() &&
              std::equal(as.begin(), as.end() - 2, bs.begin()),
          ErrorCode::kShapeMismatch,
          "bmm: " + to_string(as) + " x " + to_string(bs));
  const std::int64_t m = as[as.size() - 2], k = as.back();
  const std::int64_t n = transpose_b ? bs[bs.size() - 2] : bs.back();
  require((transpose_b ? bs.back() : bs[bs.size() - 2]) == k,
          ErrorCode::kShapeMismatch,
          "bmm inner dimension: " + to_string(as) + " x " + to_string(bs));
  const std::int64_t batch =
      static_cast<std::int64_t>(a.value().size()) / (m * k);
  Shape os = as;
  os.back() = n;
  Tensor out(os);
  std::vector<float> tmp(static_cast<std::size_t>(k * n));
  for (std::int64_t p = 0; p < batch; ++p) {
    const float* bp = b.value().raw() + p * k * n;
    if (transpose_b) {
      kernels::transpose(bp, tmp.data(), n, k);
      bp = tmp.data();
    }
    kernels::gemm(a.value().raw() + p * m * k, bp, out.raw() + p * m * n, m, k,
                  n, false);
  }
  const Var in[] = {a, b};
  const auto ia = a.id(), ib = b.id();
  return tape_of(a).record(
      std::move(out), in,
      [ia, ib, m, k, n, batch, transpose_b](Tape& t, const Tensor& g) {
        Tensor* ga = t.grad_buffer(ia);
        Tensor* gb = t.grad_buffer(ib);
        const Tensor& av = t.value(ia);
        const Tensor& bv = t.value(ib);
        std::vector<float> tmp(static_cast<std::size_t>(std::max(k * n, m * k)));
        for (std::int64_t p = 0; p < batch; ++p) {
          const float* gp = g.raw() + p * m * n;
          const float* ap = av.raw() + p * m * k;
          const float* bp = bv.raw() + p * k * n;
          if (ga) {
            // dA = G * B^T; B^T is [n,k] when B is [k,n], or B itself.
            const float* bt = bp;
            if (!transpose_b) {
              kernels::transpose(bp, tmp.data(), k, n);
              bt = tmp.data();
            }
            kernels::gemm(gp, bt, ga->raw() + p * m * k, m, n, k, true);
          }
          if (gb) {
            if (!transpose_b) {
              kernels::gemm_tn_acc(ap, gp, gb->raw() + p * k * n, m, k, n);
            } else {
              // B is [n,k]: dB = G^T * A
              kernels::gemm_tn_acc(gp, ap, gb->raw() + p * n * k, m, n, k);
            }
          }
        }
      });
}

Var layer_norm(Var x, Var gain, Var bias, float eps) {
  const Shape& xs = x.shape();
  const std::int64_t d = xs.back();
  require(gain.shape() == Shape{d} && bias.shape() == Shape{d},
          ErrorCode::kShapeMismatch, "layer_norm parameter shape");
  const std::int64_t rows = static_cast<std::int64_t>(x.value().size()) / d;
  Tensor out(xs);
  Tensor xhat(xs);
  std::vector<float> inv_std(static_cast<std::size_t>(rows));
  const float* xv = x.value().raw();
  const float* gv = gain.value().raw();
  const float* bv = bias.value().raw();
  for (std::int64_t r = 0; r < rows; ++r) {
    const float* row = xv + r * d;
    float mu = 0.0f;
    for (std::int64_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<float>(d);
    float var = 0.0f;
    for (std::int64_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<float>(d);
    const float is = 1.0f / std::sqrt(var + eps);
    inv_std[r] = is;
    for (std::int64_t j = 0; j < d; ++j) {
      const float h = (row[j] - mu) * is;
      xhat[r * d + j] = h;
      out[r * d + j] = h * gv[j] + bv[j];
    }
  }
  const Var in[] = {x, gain, bias};
  const auto ix = x.id(), ig = gain.id(), ib = bias.id();
  return tape_of(x).record(
      std::move(out), in,
      [ix, ig, ib, d, rows, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](Tape& t, const Tensor& g) {
        const float* gv = t.value(ig).raw();
        if (Tensor* gg = t.grad_buffer(ig))
          for (std::int64_t r = 0; r < rows; ++r)
            for (std::int64_t j = 0; j < d; ++j)
              (*gg)[j] += g[r * d + j] * xhat[r * d + j];
        if (Tensor* gb = t.grad_buffer(ib))
          for (std::int64_t r = 0; r < rows; ++r)
            for (std::int64_t j = 0; j < d; ++j) (*gb)[j] += g[r * d + j];
        if (Tensor* gx = t.grad_buffer(ix)) {
          std::vector<float> dh(static_cast<std::size_t>(d));
          for (std::int64_t r = 0; r < rows; ++r) {
            float m1 = 0.0f, m2 = 0.0f;
            for (std::int64_t j = 0; j < d; ++j) {
              dh[j] = g[r * d + j] * gv[j];
              m1 += dh[j];
              m2 += dh[j] * xhat[r * d + j];
            }
            m1 /= static_cast<float>(d);
            m2 /= static_cast<float>(d);
            for (std::int64_t j = 0; j < d; ++j)
              (*gx)[r * d + j] +=
                  inv_std[r] * (dh[j] - m1 - xhat[r * d + j] * m2);
          }
        }
      });
}

Var softmax(Var x) {
  const Shape& xs = x.shape();
  const std::int64_t d = xs.back();
  const std::int64_t rows = static_cast<std::int64_t>(x.value().size()) / d;
  Tensor out(xs);
  const float* xv = x.value().raw();
  for (std::int64_t r = 0; r < rows; ++r) {
    const float* row = xv + r * d;
    float mx = row[0];
    for (std::int64_t j = 1; j < d; ++j) mx = std::max(mx, row[j]);
    float s = 0.0f;
    for (std::int64_t j = 0; j < d; ++j) {
      out[r * d + j] = std::exp(row[j] - mx);
      s += out[r * d + j];
    }
    for (std::int64_t j = 0; j < d; ++j) out[r * d + j] /= s;
  }
  const Var in[] = {x};
  const auto ix = x.id();
  const auto iy = static_cast<std::uint32_t>(tape_of(x).size());
  return tape_of(x).record(
      std::move(out), in, [ix, iy, d, rows](Tape& t, const Tensor& g) {
        Tensor* gx = t.grad_buffer(ix);
        if (!gx) return;
        const Tensor& y = t.value(iy);
        for (std::int64_t r = 0; r < rows; ++r) {
          float dot = 0.0f;
          for (std::int64_t j = 0; j < d; ++j) dot += g[r * d + j] * y[r * d + j];
          for (std::int64_t j = 0; j < d; ++j)
            (*gx)[r * d + j] += y[r * d + j] * (g[r * d + j] - dot);
        }
      });
}

Var embedding(Var table, std::span<const int> ids) {
  const Shape& ts = table.shape();
  require(ts.size() == 2 && !ids.empty(), ErrorCode::kShapeMismatch,
          "embedding table must be [V, D] and ids non-empty");
  const std::int64_t v = ts[0], d = ts[1];
  const auto n = static_cast<std::int64_t>(ids.size());
  Tensor out({n, d});
  for (std::int64_t i = 0; i < n; ++i) {
    require(ids[i] >= 0 && ids[i] < v, ErrorCode::kInvalidArgument,
            "embedding id out of range");
    std::copy_n(table.value().raw() + ids[i] * d, d, out.raw() + i * d);
  }
  const Var in[] = {table};
  const auto it = table.id();
  return tape_of(table).record(
      std::move(out), in,
      [it, d, idv = std::vector<int>(ids.begin(), ids.end())](
          Tape& t, const Tensor& g) {
        Tensor* gt = t.grad_buffer(it);
        if (!gt) return;
        for (std::size_t i = 0; i < idv.size(); ++i)
          for (std::int64_t j = 0; j < d; ++j)
            (*gt)[idv[i] * d + j] += g[i * d + j];
      });
}

Var concat(std::span<const Var> parts, std::size_t axis) {
  require(!parts.empty(), ErrorCode::kInvalidArgument, "concat of nothing");
  Shape os = parts[0].shape();
  require(axis < os.size(), ErrorCode::kShapeMismatch, "concat axis");
  std::int64_t total = 0;
  for (const Var& p : parts) {
    Shape s = p.shape();
    require(s.size() == os.size(), ErrorCode::kShapeMismatch, "concat rank");
    total += s[axis];
    s[axis] = os[axis];
    require(s == os, ErrorCode::kShapeMismatch,
            "concat shapes " + to_string(p.shape()) + " vs " +
                to_string(parts[0].shape()));
  }
  os[axis] = total;
  std::int64_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= os[i];
  for (std::size_t i = axis + 1; i < os.size(); ++i) inner *= os[i];
  Tensor out(os);
  std::vector<std::int64_t> widths;
  std::int64_t off = 0;
  for (const Var& p : parts) {
    const std::int64_t w = p.shape()[axis] * inner;
    widths.push_back(w);
    for (std::int64_t o = 0; o < outer; ++o)
      std::copy_n(p.value().raw() + o * w, w,
                  out.raw() + o * total * inner + off);
    off += w;
  }
  std::vector<std::uint32_t> ids;
  for (const Var& p : parts) ids.push_back(p.id());
  return tape_of(parts[0]).record(
      std::move(out), parts,
      [ids = std::move(ids), widths = std::move(widths), outer, total,
       inner](Tape& t, const Tensor& g) {
        std::int64_t off = 0;
        for (std::size_t k = 0; k < ids.size(); ++k) {
          const std::int64_t w = widths[k];
          if (Tensor* gp = t.grad_buffer(ids[k]))
            for (std::int64_t o = 0; o < outer; ++o) {
              const float* src = g.raw() + o * total * inner + off;
              float* dst = gp->raw() + o * w;
              for (std::int64_t j = 0; j < w; ++j) dst[j] += src[j];
            }
          off += w;
        }
      });
}

Var slice(Var x, std::size_t axis, std::int64_t begin, std::int64_t length) {
  const Shape& xs = x.shape();
  require(axis < xs.size() && begin >= 0 && length > 0 &&
              begin + length <= xs[axis],
          ErrorCode::kShapeMismatch, "slice out of range");
  std::int64_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= xs[i];
  for (std::size_t i = axis + 1; i < xs.size(); ++i) inner *= xs[i];
  const std::int64_t full = xs[axis];
  Shape os = xs;
  os[axis] = length;
  Tensor out(os);
  for (std::int64_t o = 0; o < outer; ++o)
    std::copy_n(x.value().raw() + (o * full + begin) * inner, length * inner,
                out.raw() + o * length * inner);
  const Var in[] = {x};
  const auto ix = x.id();
  return tape_of(x).record(
      std::move(out), in,
      [ix, outer, inner, full, begin, length](Tape& t, const Tensor& g) {
        Tensor* gx = t.grad_buffer(ix);
        if (!gx) return;
        for (std::int64_t o = 0; o < outer; ++o) {
          const float* src = g.raw() + o * length * inner;
          float* dst = gx->raw() + (o * full + begin) * inner;
          for (std::int64_t j = 0; j < length * inner; ++j) dst[j] += src[j];
        }
      });
}

Var reshape(Var x, Shape shape) {
  require(numel(shape) == static_cast<std::int64_t>(x.value().size()),
          ErrorCode::kShapeMismatch,
          "reshape " + to_string(x.shape()) + " -> " + to_string(shape));
  const Var in[] = {x};
  const auto ix = x.id();
  return tape_of(x).record(x.value().reshaped(std::move(shape)), in,
                           [ix](Tape& t, const Tensor& g) {
                             if (Tensor* gx = t.grad_buffer(ix))
                               for (std::size_t i = 0; i < g.size(); ++i)
                                 (*gx)[i] += g[i];
                           });
}

Var permute(Var x, std::span<const std::size_t> perm) {
  const Shape& xs = x.shape();
  require(perm.size() == xs.size(), ErrorCode::kShapeMismatch, "permute rank");
  const std::size_t r = xs.size();
  Shape os(r);
  for (std::size_t i = 0; i < r; ++i) os[i] = xs[perm[i]];
  const auto in_strides = strides_of(xs);
  // Stride in the input for each output axis.
  std::vector<std::int64_t> src_stride(r);
  for (std::size_t i = 0; i < r; ++i) src_stride[i] = in_strides[perm[i]];
  // Flat source index for every output element.
  const auto n = static_cast<std::size_t>(numel(os));
  std::vector<std::int64_t> map(n);
  std::vector<std::int64_t> idx(r, 0);
  for (std::size_t f = 0; f < n; ++f) {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < r; ++i) s += idx[i] * src_stride[i];
    map[f] = s;
    for (std::size_t i = r; i-- > 0;) {
      if (++idx[i] < os[i]) break;
      idx[i] = 0;
    }
  }
  Tensor out(os);
  for (std::size_t f = 0; f < n; ++f) out[f] = x.value()[map[f]];
  const Var in[] = {x};
  const auto ix = x.id();
  return tape_of(x).record(std::move(out), in,
                           [ix, map = std::move(map)](Tape& t, const Tensor& g) {
                             Tensor* gx = t.grad_buffer(ix);
                             if (!gx) return;
                             for (std::size_t f = 0; f < map.size(); ++f)
                               (*gx)[map[f]] += g[f];
                           });
}

Var sum(Var x) {
  double s = 0.0;
  for (float v : x.value().data()) s += v;
  const Var in[] = {x};
  const auto ix = x.id();
  return tape_of(x).record(Tensor::scalar(static_cast<float>(s)), in,
                           [ix](Tape& t, const Tensor& g) {
                             Tensor* gx = t.grad_buffer(ix);
                             if (!gx) return;
                             for (std::size_t i = 0; i < gx->size(); ++i)
                               (*gx)[i] += g[0];
                           });
}

Var mean(Var x) {
  const auto n = static_cast<float>(x.value().size());
  double s = 0.0;
  for (float v : x.value().data()) s += v;
  const Var in[] = {x};
  const auto ix = x.id();
  return tape_of(x).record(Tensor::scalar(static_cast<float>(s / n)), in,
                           [ix, n](Tape& t, const Tensor& g) {
                             Tensor* gx = t.grad_buffer(ix);
                             if (!gx) return;
                             const float gi = g[0] / n;
                             for (std::size_t i = 0; i < gx->size(); ++i)
                               (*gx)[i] += gi;
                           });
}

Var mean_axis(Var x, std::size_t axis) {
  const Shape& xs = x.shape();
  require(axis < xs.size(), ErrorCode::kShapeMismatch, "mean_axis axis");
  std::int64_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= xs[i];
  for (std::size_t i = axis + 1; i < xs.size(); ++i) inner *= xs[i];
  const std::int64_t len = xs[axis];
  Shape os = xs;
  os.erase(os.begin() + static_cast<std::ptrdiff_t>(axis));
  Tensor out(os);
  const float inv = 1.0f / static_cast<float>(len);
  for (std::int64_t o = 0; o < outer; ++o) {
    float* dst = out.raw() + o * inner;
    for (std::int64_t l = 0; l < len; ++l) {
      const float* src = x.value().raw() + (o * len + l) * inner;
      for (std::int64_t j = 0; j < inner; ++j) dst[j] += src[j];
    }
    for (std::int64_t j = 0; j < inner; ++j) dst[j] *= inv;
  }
  const Var in[] = {x};
  const auto ix = x.id();
  return tape_of(x).record(
      std::move(out), in, [ix, outer, inner, len, inv](Tape& t, const Tensor& g) {
        Tensor* gx = t.grad_buffer(ix);
        if (!gx) return;
        for (std::int64_t o = 0; o < outer; ++o)
          for (std::int64_t l = 0; l < len; ++l) {
            float* dst = gx->raw() + (o * len + l) * inner;
            const float* src = g.raw() + o * inner;
            for (std::int64_t j = 0; j < inner; ++j) dst[j] += src[j] * inv;
          }
      });
}

Var sum_last(Var x) {
  const Shape& xs = x.shape();
  require(!xs.empty(), ErrorCode::kShapeMismatch, "sum_last on scalar");
  const std::int64_t d = xs.back();
  const std::int64_t rows = static_cast<std::int64_t>(x.value().size()) / d;
  Shape os(xs.begin(), xs.end() - 1);
  Tensor out(os);
  for (std::int64_t r = 0; r < rows; ++r) {
    float s = 0.0f;
    for (std::int64_t j = 0; j < d; ++j) s += x.value()[r * d + j];
    out[r] = s;
  }
  const Var in[] = {x};
  const auto ix = x.id();
  return tape_of(x).record(std::move(out), in,
                           [ix, rows, d](Tape& t, const Tensor& g) {
                             Tensor* gx = t.grad_buffer(ix);
                             if (!gx) return;
                             for (std::int64_t r = 0; r < rows; ++r)
                               for (std::int64_t j = 0; j < d; ++j)
                                 (*gx)[r * d + j] += g[r];
                           });
}

Var cross_entropy(Var logits, std::span<const int> labels) {
  const Shape& ls = logits.shape();
  require(ls.size() == 2 && ls[0] == static_cast<std::int64_t>(labels.size()),
          ErrorCode::kShapeMismatch, "cross_entropy expects [B, C] logits");
  const std::int64_t b = ls[0], c = ls[1];
  Tensor probs(ls);
  double loss = 0.0;
  for (std::int64_t r = 0; r < b; ++r) {
    require(labels[r] >= 0 && labels[r] < c, ErrorCode::kInvalidArgument,
            "cross_entropy label out of range");
    const float* row = logits.value().raw() + r * c;
    float mx = row[0];
    for (std::int64_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    float s = 0.0f;
    for (std::int64_t j = 0; j < c; ++j) {
      probs[r * c + j] = std::exp(row[j] - mx);
      s += probs[r * c + j];
    }
    for (std::int64_t j = 0; j < c; ++j) probs[r * c + j] /= s;
    loss -= static_cast<double>(row[labels[r]] - mx - std::log(s));
  }
  const Var in[] = {logits};
  const auto il = logits.id();
  return tape_of(logits).record(
      Tensor::scalar(static_cast<float>(loss / static_cast<double>(b))), in,
      [il, b, c, probs = std::move(probs),
       lab = std::vector<int>(labels.begin(), labels.end())](Tape& t,
                                                             const Tensor& g) {
        Tensor* gl = t.grad_buffer(il);
        if (!gl) return;
        const float s = g[0] / static_cast<float>(b);
        for (std::int64_t r = 0; r < b; ++r)
          for (std::int64_t j = 0; j < c; ++j)
            (*gl)[r * c + j] +=
                s * (probs[r * c + j] - (j == lab[r] ? 1.0f : 0.0f));
      });
}

Var mse(Var a, Var b) {
  require(a.shape() == b.shape(), ErrorCode::kShapeMismatch,
          "mse shape mismatch " + to_string(a.shape()) + " vs " +
              to_string(b.shape()));
  return mean(square(sub(a, b)));
}

}  // namespace smoodi::num
