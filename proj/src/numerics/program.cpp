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

#include "smoodi/numerics/program.hpp"

#include <algorithm>

#include "smoodi/error.hpp"

namespace smoodi::num {

Program::Program(std::vector<InputSpec> signature, Body body)
    : signature_(std::move(signature)), body_(std::move(body)) {}

NamedVars Program::bind(Tape& tape, const NamedTensors& inputs,
                        const std::vector<std::string>& wrt) const {
  NamedVars vars;
  for (const auto& spec : signature_) {
    auto it = inputs.find(spec.name);
    require(it != inputs.end(), ErrorCode::kShapeMismatch,
            "missing program input '" + spec.name + "'");
    const Shape& s = it->second.shape();
    bool ok = s.size() == spec.shape.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i)
      ok = spec.shape[i] < 0 || spec.shape[i] == s[i];
    require(ok, ErrorCode::kShapeMismatch,
            "input '" + spec.name + "' has shape " + to_string(s) +
                ", expected " + to_string(spec.shape));
    const bool differentiate =
        std::find(wrt.begin(), wrt.end(), spec.name) != wrt.end();
    vars[spec.name] = differentiate ? tape.parameter(it->second)
                                    : tape.constant(it->second);
  }
  require(inputs.size() == signature_.size(), ErrorCode::kShapeMismatch,
          "unexpected extra program inputs");
  return vars;
}

NamedTensors Program::evaluate(const NamedTensors& inputs) const {
  Tape tape;
  NamedVars outs = body_(tape, bind(tape, inputs, {}));
  NamedTensors result;
  for (auto& [name, v] : outs) {
    require(v.value().all_finite(), ErrorCode::kNonFinite,
            "program output '" + name + "' is not finite");
    result.emplace(name, v.value());
  }
  return result;
}

NamedTensors Program::gradient(const NamedTensors& inputs,
                               const std::string& output,
                               const std::vector<std::string>& wrt) const {
  for (const auto& w : wrt)
    require(std::any_of(signature_.begin(), signature_.end(),
                        [&](const InputSpec& s) { return s.name == w; }),
            ErrorCode::kInvalidArgument, "unknown gradient input '" + w + "'");
  Tape tape;
  NamedVars in = bind(tape, inputs, wrt);
  NamedVars outs = body_(tape, in);
  auto it = outs.find(output);
  require(it != outs.end(), ErrorCode::kInvalidArgument,
          "program has no output '" + output + "'");
  require(it->second.value().all_finite(), ErrorCode::kNonFinite,
          "program output '" + output + "' is not finite");
  tape.backward(it->second);
  NamedTensors grads;
  for (const auto& w : wrt) {
    Tensor g = tape.grad(in.at(w));
    require(g.all_finite(), ErrorCode::kNonFinite,
            "gradient w.r.t. '" + w + "' is not finite");
    grads.emplace(w, std::move(g));
  }
  return grads;
}

NamedTensors finite_diff_gradient(
    const Program& program, const NamedTensors& inputs,
    const std::string& output, const std::vector<std::string>& wrt, float h,
    const std::map<std::string, std::vector<std::size_t>>& coords) {
  require(h > 0.0f, ErrorCode::kInvalidArgument, "finite-difference step must be > 0");
  auto eval_at = [&](const NamedTensors& in) {
    NamedTensors out = program.evaluate(in);
    auto it = out.find(output);
    require(it != out.end(), ErrorCode::kInvalidArgument,
            "program has no output '" + output + "'");
    require(it->second.size() == 1, ErrorCode::kShapeMismatch,
            "finite differences need a scalar output");
    return static_cast<double>(it->second[0]);
  };
  NamedTensors grads;
  NamedTensors probe = inputs;
  for (const auto& w : wrt) {
    Tensor& x = probe.at(w);
    Tensor g(x.shape());
    std::vector<std::size_t> idx;
    if (auto c = coords.find(w); c != coords.end()) {
      idx = c->second;
    } else {
      idx.resize(x.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    }
    for (std::size_t i : idx) {
      require(i < x.size(), ErrorCode::kInvalidArgument, "coordinate out of range");
      const float orig = x[i];
      x[i] = orig + h;
      const float up = x[i];
      const double fp = eval_at(probe);
      x[i] = orig - h;
      const float dn = x[i];
      const double fm = eval_at(probe);
      x[i] = orig;
      // Divide by the step actually representable in f32.
      g[i] = static_cast<float>((fp - fm) / (static_cast<double>(up) - dn));
    }
    grads.emplace(w, std::move(g));
  }
  return grads;
}

}  // namespace smoodi::num
