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

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "smoodi/numerics/autodiff.hpp"

namespace smoodi::num {

using NamedTensors = std::map<std::string, Tensor>;
using NamedVars = std::map<std::string, Var>;

struct InputSpec {
  std::string name;
  Shape shape;  ///< -1 marks a free dimension.
};

/// A recorded computation from named inputs to named outputs.
///
/// The body is replayed on a fresh tape for every query, so a Program is
/// immutable and may be evaluated from several threads at once. Outputs are
/// checked for finiteness; a NaN or Inf is reported as an error.
class Program {
 public:
  using Body = std::function<NamedVars(Tape&, const NamedVars&)>;

  Program(std::vector<InputSpec> signature, Body body);

  const std::vector<InputSpec>& signature() const noexcept { return signature_; }

  NamedTensors evaluate(const NamedTensors& inputs) const;

  /// d(output)/d(input) for each name in `wrt`. The output must hold a single
  /// element. Inputs the output does not depend on get all-zero gradients.
  NamedTensors gradient(const NamedTensors& inputs, const std::string& output,
                        const std::vector<std::string>& wrt) const;

 private:
  NamedVars bind(Tape& tape, const NamedTensors& inputs,
                 const std::vector<std::string>& wrt) const;

  std::vector<InputSpec> signature_;
  Body body_;
};

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h. When `coords` has
/// an entry for an input, only those flat indices are estimated and the rest
/// stay zero.
NamedTensors finite_diff_gradient(
    const Program& program, const NamedTensors& inputs,
    const std::string& output, const std::vector<std::string>& wrt, float h,
    const std::map<std::string, std::vector<std::size_t>>& coords = {});

}  // namespace smoodi::num
