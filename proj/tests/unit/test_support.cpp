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

#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace smoodi::testing {

num::Tensor random_tensor(num::Shape shape, std::uint64_t seed, float stddev) {
  num::Tensor t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.0f, stddev);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = n(rng);
  return t;
}

double relative_error(double a, double b, double floor) {
  const double denom = std::max({std::fabs(a), std::fabs(b), floor});
  return denom == 0.0 ? 0.0 : std::fabs(a - b) / denom;
}

GradCheckResult check_gradient(const num::Program& program,
                               const num::NamedTensors& inputs,
                               const std::string& output,
                               const std::string& wrt, std::size_t count,
                               std::uint64_t seed, float h, double floor_frac) {
  const auto analytic = program.gradient(inputs, output, {wrt}).at(wrt);
  const std::size_t n = analytic.size();
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(count, n));
  const auto fd =
      num::finite_diff_gradient(program, inputs, output, {wrt}, h, {{wrt, idx}})
          .at(wrt);
  double gmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) gmax = std::max(gmax, std::fabs(double(analytic[i])));
  GradCheckResult r;
  for (std::size_t i : idx) {
    r.max_rel_error = std::max(
        r.max_rel_error, relative_error(analytic[i], fd[i], floor_frac * gmax));
    ++r.coordinates;
  }
  return r;
}

}  // namespace smoodi::testing
