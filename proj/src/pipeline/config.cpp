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

#include "smoodi/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "smoodi/error.hpp"
#include "smoodi/numerics/params.hpp"

namespace smoodi {

namespace {

// Keys and defaults. Training keys are grouped by stage prefix so each
// stage's artifacts can be addressed by the hash of its own inputs.
const std::pair<const char*, const char*> kDefaults[] = {
    {"data.seed", "2026"},
    {"data.per_cell_a", "50"},
    {"data.per_cell_b", "50"},
    {"schedule.timesteps", "1000"},
    {"schedule.beta_start", "0.0001"},
    {"schedule.beta_end", "0.02"},
    {"codec.latent_dim", "32"},
    {"codec.hidden", "256"},
    {"codec.epochs", "80"},
    {"codec.batch", "64"},
    {"codec.lr", "0.0005"},
    {"codec.seed", "1"},
    {"codec.coverage_per_cell", "10"},
    {"base.d_model", "64"},
    {"base.blocks", "4"},
    {"base.heads", "2"},
    {"base.ffn", "128"},
    {"base.tokens", "4"},
    {"base.epochs", "400"},
    {"base.batch", "64"},
    {"base.lr", "0.001"},
    {"base.content_dropout", "0.1"},
    {"base.seed", "2"},
    {"oracle.d_model", "64"},
    {"oracle.feature_dim", "16"},
    {"oracle.epochs", "30"},
    {"oracle.batch", "64"},
    {"oracle.lr", "0.001"},
    {"oracle.seed", "3"},
    {"oracle.eval_seed", "13"},
    {"oracle.coverage_per_cell", "10"},
    {"adaptor.lambda_pr", "1.0"},
    {"adaptor.lambda_cyc", "0.5"},
    {"adaptor.lr", "0.001"},
    {"adaptor.batch", "64"},
    {"adaptor.epochs", "100"},
    {"adaptor.content_dropout", "0.1"},
    {"adaptor.style_mask", "0.1"},
    {"adaptor.seed", "4"},
    {"guidance.w_c", "7.5"},
    {"guidance.w_s", "1.5"},
    {"guidance.tau", "-0.2"},
    {"guidance.k_early", "0"},
    {"guidance.k_late", "5"},
    {"guidance.t_switch", "300"},
    {"guidance.grad_mode", "clean-prediction"},
    {"guidance.sign", "descent"},
    {"sample.steps", "50"},
    {"transfer.steps", "30"},
    {"transfer.w_s", "6.5"},
    {"transfer.tau", "-0.4"},
    {"transfer.inversion_w_c", "1.0"},
    {"eval.samples", "300"},
    {"eval.seed", "11"},
    {"eval.batch", "100"},
    {"eval.kinematic_threshold", "0.05"},
    {"eval.diversity_pairs", "300"},
    {"gates.base_cra", "0.8"},
    {"gates.oracle_accuracy", "0.95"},
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& [k, v] : kDefaults) values_.emplace(k, v);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  require(it != values_.end(), ErrorCode::kConfig, "unknown config key '" + key + "'");
  require(!value.empty(), ErrorCode::kConfig, "empty value for '" + key + "'");
  it->second = value;
}

void RunConfig::assign(std::string_view line) {
  const auto eq = line.find('=');
  require(eq != std::string_view::npos, ErrorCode::kConfig,
          "expected key=value, got '" + std::string(line) + "'");
  set(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  require(is.good(), ErrorCode::kIo, "cannot read config " + path.string());
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    std::string_view v = line;
    if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim(v);
    if (v.empty()) continue;
    try {
      assign(v);
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

const std::string& RunConfig::get(std::string_view key) const {
  auto it = values_.find(key);
  require(it != values_.end(), ErrorCode::kConfig, "unknown config key '" + std::string(key) + "'");
  return it->second;
}

namespace {
template <class T>
T parse_number(std::string_view key, const std::string& v) {
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  require(ec == std::errc() && p == v.data() + v.size(), ErrorCode::kConfig,
          "config key '" + std::string(key) + "' has non-numeric value '" + v + "'");
  return out;
}
}  // namespace

int RunConfig::get_int(std::string_view key) const { return parse_number<int>(key, get(key)); }

std::uint64_t RunConfig::get_u64(std::string_view key) const {
  return parse_number<std::uint64_t>(key, get(key));
}

float RunConfig::get_float(std::string_view key) const {
  const float f = parse_number<float>(key, get(key));
  require(std::isfinite(f), ErrorCode::kConfig, "config key '" + std::string(key) + "' not finite");
  return f;
}

std::vector<std::string> RunConfig::echo() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k + "=" + v);
  return out;
}

std::string RunConfig::hash(const std::vector<std::string>& prefixes) const {
  std::string blob;
  for (const auto& [k, v] : values_) {
    for (const auto& p : prefixes) {
      if (k.rfind(p, 0) == 0) {
        blob += k + "=" + v + "\n";
        break;
      }
    }
  }
  return num::to_hex(num::fnv1a64(blob));
}

std::string RunConfig::hash() const { return hash({""}); }

}  // namespace smoodi
