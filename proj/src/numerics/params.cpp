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

#include "smoodi/numerics/params.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "smoodi/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "blob I/O assumes a little-endian host");

namespace smoodi::num {

void ParameterStore::add(std::string name, Tensor value) {
  require(!contains(name), ErrorCode::kInvalidArgument,
          "duplicate parameter '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(value));
}

bool ParameterStore::contains(std::string_view name) const {
  return index_.find(name) != index_.end();
}

const Tensor& ParameterStore::get(std::string_view name) const {
  auto it = index_.find(name);
  require(it != index_.end(), ErrorCode::kInvalidArgument,
          "unknown parameter '" + std::string(name) + "'");
  return entries_[it->second].second;
}

Tensor& ParameterStore::mutable_get(std::string_view name) {
  auto it = index_.find(name);
  require(it != index_.end(), ErrorCode::kInvalidArgument,
          "unknown parameter '" + std::string(name) + "'");
  return entries_[it->second].second;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.first);
  return out;
}

std::size_t ParameterStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.size();
  return n;
}

std::string ParameterStore::checksum() const {
  std::ostringstream os;
  for (const auto& [name, t] : entries_) write_tensor_record(os, name, t);
  return to_hex(fnv1a64(os.str()));
}

void ParameterStore::copy_prefixed(const ParameterStore& src,
                                   std::string_view from, std::string_view to) {
  for (const auto& [name, t] : src.entries()) {
    if (name.compare(0, from.size(), from) != 0) continue;
    add(std::string(to) + name.substr(from.size()), t);
  }
}

Var Bound::operator[](std::string_view name) const {
  auto it = cache_.find(name);
  if (it != cache_.end()) return it->second;
  const Tensor& t = store_->get(name);
  Var v = trainable_ ? tape_->parameter(t) : tape_->constant(t);
  cache_.emplace(std::string(name), v);
  return v;
}

std::map<std::string, Tensor> Bound::gradients() const {
  std::map<std::string, Tensor> g;
  for (const auto& [name, v] : cache_) g.emplace(name, tape_->grad(v));
  return g;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}

bool get_u32(std::istream& is, std::uint32_t& v) {
  is.read(reinterpret_cast<char*>(&v), 4);
  return is.gcount() == 4;
}

}  // namespace

void write_tensor_record(std::ostream& os, const std::string& name,
                         const Tensor& t) {
  put_u32(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u32(os, static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) put_u32(os, static_cast<std::uint32_t>(d));
  os.write(reinterpret_cast<const char*>(t.raw()),
           static_cast<std::streamsize>(t.size() * sizeof(float)));
}

bool read_tensor_record(std::istream& is, std::string& name, Tensor& t) {
  std::uint32_t len = 0;
  is.read(reinterpret_cast<char*>(&len), 4);
  if (is.gcount() == 0) return false;
  require(is.gcount() == 4, ErrorCode::kFormat, "truncated tensor record");
  require(len < (1u << 16), ErrorCode::kFormat, "implausible tensor name length");
  name.assign(len, '\0');
  is.read(name.data(), len);
  std::uint32_t rank = 0;
  require(is.gcount() == static_cast<std::streamsize>(len) && get_u32(is, rank) &&
              rank <= 8,
          ErrorCode::kFormat, "truncated tensor record '" + name + "'");
  Shape shape(rank);
  for (auto& d : shape) {
    std::uint32_t v = 0;
    require(get_u32(is, v) && v > 0, ErrorCode::kFormat,
            "bad dimension in tensor record '" + name + "'");
    d = v;
  }
  std::vector<float> data(static_cast<std::size_t>(numel(shape)));
  is.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(float)));
  require(is.gcount() == static_cast<std::streamsize>(data.size() * sizeof(float)),
          ErrorCode::kFormat, "truncated payload in tensor record '" + name + "'");
  t = Tensor(std::move(shape), std::move(data));
  return true;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void save_checkpoint(const std::filesystem::path& path,
                     const std::string& header, const ParameterStore& params) {
  require(header.find('\n') == std::string::npos, ErrorCode::kInvalidArgument,
          "checkpoint header must be a single line");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(os), ErrorCode::kIo, "cannot write " + tmp.string());
    os << header << '\n';
    for (const auto& [name, t] : params.entries()) write_tensor_record(os, name, t);
    require(static_cast<bool>(os), ErrorCode::kIo, "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::kIo, "cannot open " + path.string());
  Checkpoint ck;
  std::getline(is, ck.header);
  std::string name;
  Tensor t;
  while (read_tensor_record(is, name, t)) ck.params.add(name, std::move(t));
  return ck;
}

std::string header_field(std::string_view header, std::string_view key) {
  std::size_t pos = 0;
  while (pos < header.size()) {
    std::size_t end = header.find(' ', pos);
    if (end == std::string_view::npos) end = header.size();
    std::string_view tok = header.substr(pos, end - pos);
    if (tok.size() > key.size() && tok.compare(0, key.size(), key) == 0 &&
        tok[key.size()] == '=')
      return std::string(tok.substr(key.size() + 1));
    pos = end + 1;
  }
  return {};
}

AdamW::AdamW(ParameterStore& params, std::vector<std::string> names,
             AdamWConfig config)
    : params_(&params), names_(std::move(names)), config_(config) {
  for (const auto& n : names_) {
    m_.push_back(Tensor::zeros(params.get(n).shape()));
    v_.push_back(Tensor::zeros(params.get(n).shape()));
  }
}

void AdamW::step(const std::map<std::string, Tensor>& grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(static_cast<double>(config_.beta1), t_);
  const double bc2 = 1.0 - std::pow(static_cast<double>(config_.beta2), t_);
  const float step = static_cast<float>(config_.lr / bc1);
  const float inv_bc2 = static_cast<float>(1.0 / bc2);
  const float decay = 1.0f - config_.lr * config_.weight_decay;
  for (std::size_t k = 0; k < names_.size(); ++k) {
    Tensor& p = params_->mutable_get(names_[k]);
    auto it = grads.find(names_[k]);
    const Tensor* g = it == grads.end() ? nullptr : &it->second;
    require(!g || g->shape() == p.shape(), ErrorCode::kShapeMismatch,
            "gradient shape for '" + names_[k] + "'");
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const float gi = g ? (*g)[i] : 0.0f;
      m[i] = config_.beta1 * m[i] + (1.0f - config_.beta1) * gi;
      v[i] = config_.beta2 * v[i] + (1.0f - config_.beta2) * gi * gi;
      p[i] = p[i] * decay - step * m[i] / (std::sqrt(v[i] * inv_bc2) + config_.eps);
    }
  }
}

float cosine_lr(float base, std::int64_t step, std::int64_t total,
                float floor_frac) {
  if (total <= 1) return base;
  const double x = std::clamp(static_cast<double>(step) / static_cast<double>(total - 1), 0.0, 1.0);
  const double c = 0.5 * (1.0 + std::cos(3.14159265358979323846 * x));
  return static_cast<float>(base * (floor_frac + (1.0 - floor_frac) * c));
}

std::vector<std::vector<std::int64_t>> shuffled_batches(std::size_t n,
                                                        std::size_t batch,
                                                        Rng& rng) {
  require(batch > 0, ErrorCode::kInvalidArgument, "batch size must be positive");
  std::vector<std::int64_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::int64_t>(i);
  // Fisher-Yates with an explicit draw so the order is portable across
  // standard libraries.
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  std::vector<std::vector<std::int64_t>> out;
  for (std::size_t b = 0; b < n; b += batch)
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(b),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(n, b + batch)));
  return out;
}

}  // namespace smoodi::num
