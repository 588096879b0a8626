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

namespace smoodi::num::kernels {

// Every output row depends only on its own input row, with a fixed
// accumulation order, so results do not change with batch composition.

/// C[M,N] (+)= A[M,K] * B[K,N]
inline void gemm(const float* a, const float* b, float* c, std::int64_t m,
                 std::int64_t k, std::int64_t n, bool accumulate) {
  for (std::int64_t i = 0; i < m; ++i) {
    float* __restrict crow = c + i * n;
    if (!accumulate)
      for (std::int64_t j = 0; j < n; ++j) crow[j] = 0.0f;
    const float* arow = a + i * k;
    for (std::int64_t p = 0; p < k; ++p) {
      const float av = arow[p];
      const float* __restrict brow = b + p * n;
      for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

/// C[K,N] += A[M,K]^T * D[M,N]
inline void gemm_tn_acc(const float* a, const float* d, float* c,
                        std::int64_t m, std::int64_t k, std::int64_t n) {
  for (std::int64_t i = 0; i < m; ++i) {
    const float* arow = a + i * k;
    const float* __restrict drow = d + i * n;
    for (std::int64_t p = 0; p < k; ++p) {
      const float av = arow[p];
      if (av == 0.0f) continue;
      float* __restrict crow = c + p * n;
      for (std::int64_t j = 0; j < n; ++j) crow[j] += av * drow[j];
    }
  }
}

/// out[N,M] = in[M,N]^T
inline void transpose(const float* in, float* out, std::int64_t m,
                      std::int64_t n) {
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t j = 0; j < n; ++j) out[j * m + i] = in[i * n + j];
}

}  // namespace smoodi::num::kernels
