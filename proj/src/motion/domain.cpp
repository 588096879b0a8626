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

#include "smoodi/motion.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>

#include "smoodi/error.hpp"

namespace smoodi::motion {

namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::array<std::string_view, kNumContents> kContentNames = {
    "walk-line", "walk-circle", "zigzag", "figure-eight", "stop-go", "spiral"};
constexpr std::array<std::string_view, kNumStyles> kStyleNames = {
    "neutral", "wobble",           "hurried",          "slow-drag",
    "lean-left", "jitter", "exaggerated-phase", "tiptoe-short-step"};
constexpr std::array<std::string_view, kChannels> kChannelNames = {
    "pos_x", "pos_y", "heading", "phase_a", "phase_b", "vel_x", "vel_y", "heading_rate"};

// Jitter is a fixed pattern, the same for every sequence, so that it is a
// style rather than unlearnable per-sequence noise.
constexpr std::uint64_t kJitterPatternSeed = 0x6a177e2dULL;
constexpr double kStopGoPeriod = 32.0;

struct Vec2 {
  double x = 0, y = 0;
};

// Path point and its first two derivatives with respect to the path
// parameter u.
struct PathSample {
  Vec2 p, d1, d2;
};

PathSample unrotated_path(Content c, double u, double shape) {
  PathSample s;
  switch (c) {
    case Content::kWalkLine:
    case Content::kStopGo:
      s.p = {u, 0};
      s.d1 = {1, 0};
      break;
    case Content::kWalkCircle: {
      const double r = 4.5 * shape, a = u / r;
      s.p = {r * std::sin(a), r * (1 - std::cos(a))};
      s.d1 = {std::cos(a), std::sin(a)};
      s.d2 = {-std::sin(a) / r, std::cos(a) / r};
      break;
    }
    case Content::kZigzag: {
      const double amp = 0.6 * shape, k = 2 * kPi / 6.0;
      s.p = {u, amp * std::sin(k * u)};
      s.d1 = {1, amp * k * std::cos(k * u)};
      s.d2 = {0, -amp * k * k * std::sin(k * u)};
      break;
    }
    case Content::kFigureEight: {
      const double r = 2.5 * shape, a = u / r;
      s.p = {r * std::sin(a), 0.5 * r * std::sin(2 * a)};
      s.d1 = {std::cos(a), std::cos(2 * a)};
      s.d2 = {-std::sin(a) / r, -2 * std::sin(2 * a) / r};
      break;
    }
    case Content::kSpiral: {
      // r(a) = r0 (1 + k a), traversed at unit speed: a(u) solves
      // r0 (a + k a^2 / 2) = u.
      const double k = 0.35, r0 = 3.0 * shape, g = k * r0;
      const double root = std::sqrt(1 + 2 * k * u / r0);
      const double a = (root - 1) / k;
      const double r = r0 * (1 + k * a);
      const double da = 1 / r, dda = -g / (r * r * r);
      const double ca = std::cos(a), sa = std::sin(a);
      const Vec2 pa{g * sa + r * ca, -g * ca + r * sa};
      const Vec2 paa{2 * g * ca - r * sa, 2 * g * sa + r * ca};
      s.p = {r * sa, r0 - r * ca};
      s.d1 = {pa.x * da, pa.y * da};
      s.d2 = {paa.x * da * da + pa.x * dda, paa.y * da * da + pa.y * dda};
      break;
    }
  }
  return s;
}

// Each path is rotated about the origin so that its unwrapped heading stays
// inside (-pi, pi) for every seed and style: the heading channel then has
// no wrap discontinuities.
double content_rotation(Content c) {
  switch (c) {
    case Content::kWalkCircle:
      return -kPi / 2;
    case Content::kFigureEight:
      return kPi / 2;
    case Content::kSpiral:
      return -kPi / 2 + std::atan(0.35);
    default:
      return 0.0;
  }
}

PathSample path_at(Content c, double u, double shape) {
  PathSample s = unrotated_path(c, u, shape);
  const double rho = content_rotation(c);
  if (rho == 0.0) return s;
  const double cr = std::cos(rho), sr = std::sin(rho);
  auto rot = [&](Vec2 v) { return Vec2{cr * v.x - sr * v.y, sr * v.x + cr * v.y}; };
  return {rot(s.p), rot(s.d1), rot(s.d2)};
}

double wrap_angle(double a) {
  a = std::remainder(a, 2 * kPi);
  if (a <= -kPi) a += 2 * kPi;
  return a;
}

// 7-point central first-derivative stencil.
constexpr double kStencil[4] = {0.0, 45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0};

template <typename Get>
double stencil_derivative(Get&& f, std::int64_t k) {
  double d = 0;
  for (int j = 1; j <= 3; ++j) d += kStencil[j] * (f(k + j) - f(k - j));
  return d;
}

// Derivative of a sampled signal: the stencil on the interior, lower-order
// differences near the ends.
std::vector<double> sampled_derivative(const std::vector<double>& v) {
  const auto n = static_cast<std::int64_t>(v.size());
  std::vector<double> d(v.size());
  auto at = [&](std::int64_t i) { return v[static_cast<std::size_t>(i)]; };
  for (std::int64_t k = 0; k < n; ++k) {
    double r;
    if (k >= kStencilBegin && k < n - 3)
      r = stencil_derivative(at, k);
    else if (k == 0)
      r = (-3 * at(0) + 4 * at(1) - at(2)) / 2;
    else if (k == n - 1)
      r = (3 * at(n - 1) - 4 * at(n - 2) + at(n - 3)) / 2;
    else
      r = (at(k + 1) - at(k - 1)) / 2;
    d[static_cast<std::size_t>(k)] = r;
  }
  return d;
}

const std::array<std::vector<double>, 2>& jitter_pattern() {
  static const std::array<std::vector<double>, 2> pattern = [] {
    std::mt19937_64 rng(kJitterPatternSeed);
    std::normal_distribution<double> nd(0.0, kJitterSigma);
    std::array<std::vector<double>, 2> p;
    for (auto& ch : p) ch.resize(kFrames);
    for (std::int64_t k = 0; k < kFrames; ++k)
      for (auto& ch : p) ch[static_cast<std::size_t>(k)] = nd(rng);
    return p;
  }();
  return pattern;
}

}  // namespace

std::string_view name(Content c) {
  const auto i = static_cast<std::size_t>(c);
  require(i < kContentNames.size(), ErrorCode::kInvalidArgument, "bad content id");
  return kContentNames[i];
}

std::string_view name(Style s) {
  const auto i = static_cast<std::size_t>(s);
  require(i < kStyleNames.size(), ErrorCode::kInvalidArgument, "bad style id");
  return kStyleNames[i];
}

Content parse_content(std::string_view s) {
  for (std::size_t i = 0; i < kContentNames.size(); ++i)
    if (kContentNames[i] == s) return static_cast<Content>(i);
  fail(ErrorCode::kInvalidArgument, "unknown content label '" + std::string(s) + "'");
}

Style parse_style(std::string_view s) {
  for (std::size_t i = 0; i < kStyleNames.size(); ++i)
    if (kStyleNames[i] == s) return static_cast<Style>(i);
  fail(ErrorCode::kInvalidArgument, "unknown style label '" + std::string(s) + "'");
}

Content content_from_id(int id) {
  require(id >= 0 && id < kNumContents, ErrorCode::kInvalidArgument,
          "content id out of range: " + std::to_string(id));
  return static_cast<Content>(id);
}

Style style_from_id(int id) {
  require(id >= 0 && id < kNumStyles, ErrorCode::kInvalidArgument,
          "style id out of range: " + std::to_string(id));
  return static_cast<Style>(id);
}

const std::array<std::string_view, kChannels>& channel_names() { return kChannelNames; }

std::vector<Content> all_contents() {
  std::vector<Content> v;
  for (int i = 0; i < kNumContents; ++i) v.push_back(static_cast<Content>(i));
  return v;
}

std::vector<Style> all_styles() {
  std::vector<Style> v;
  for (int i = 0; i < kNumStyles; ++i) v.push_back(static_cast<Style>(i));
  return v;
}

std::vector<Style> styled_styles() {
  std::vector<Style> v;
  for (int i = 1; i < kNumStyles; ++i) v.push_back(static_cast<Style>(i));
  return v;
}

StyleModulation modulation(Style s) {
  StyleModulation m;
  switch (s) {
    case Style::kNeutral:
      break;
    case Style::kWobble:
      m.wobble_amplitude = kWobbleAmplitude;
      break;
    case Style::kHurried:
      m.speed = 1.6f;
      m.phase_rate = 1.6f;
      break;
    case Style::kSlowDrag:
      m.speed = 0.5f;
      m.phase_rate = 0.5f;
      break;
    case Style::kLeanLeft:
      m.heading_offset = -0.3f;
      break;
    case Style::kJitter:
      m.jitter_sigma = kJitterSigma;
      break;
    case Style::kExaggeratedPhase:
      m.limb_amplitude = 2.0f;
      break;
    case Style::kTiptoeShortStep:
      // Half-length steps at 1.5x cadence.
      m.phase_rate = 1.5f;
      m.speed = 0.5f * 1.5f;
      break;
  }
  return m;
}

MotionSequence synthesize(Content content, Style style, std::uint64_t seed) {
  (void)name(content);
  (void)name(style);
  const StyleModulation m = modulation(style);

  // Per-sequence variation is drawn in a fixed order independent of the
  // labels, so neighbouring cells share their nuisance draws.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double speed_var = 0.9 + 0.2 * unit(rng);
  const double shape = 0.85 + 0.3 * unit(rng);
  const double cadence_var = 0.97 + 0.06 * unit(rng);

  const double v = kBaseSpeed * speed_var * m.speed;
  const double phase_w = 2 * kPi / kStridePeriodFrames * cadence_var * m.phase_rate;
  const double wob_w = 2 * kPi / kWobblePeriodFrames;

  MotionSequence out;
  out.content = content;
  out.style = style;
  out.seed = seed;
  out.frames = num::Tensor({kFrames, kChannels});

  std::vector<double> px(kFrames), py(kFrames), vx(kFrames), vy(kFrames);
  for (std::int64_t k = 0; k < kFrames; ++k) {
    const double t = static_cast<double>(k);
    double u = v * t, du = v;
    if (content == Content::kStopGo) {
      const double w = 2 * kPi / kStopGoPeriod;
      u = v * (t - std::sin(w * t) / w);
      du = v * (1 - std::cos(w * t));
    }
    const PathSample s = path_at(content, u, shape);
    const double speed2 = s.d1.x * s.d1.x + s.d1.y * s.d1.y;
    const double inv = 1.0 / std::sqrt(speed2);
    const Vec2 tan{s.d1.x * inv, s.d1.y * inv};
    const Vec2 nrm{-tan.y, tan.x};
    // Heading derivative with respect to u.
    const double turn = (s.d1.x * s.d2.y - s.d1.y * s.d2.x) / speed2;

    double x = s.p.x, y = s.p.y;
    double dx = s.d1.x * du, dy = s.d1.y * du;
    if (m.wobble_amplitude != 0.0f) {
      const double w = m.wobble_amplitude * std::sin(wob_w * t);
      const double dw = m.wobble_amplitude * wob_w * std::cos(wob_w * t);
      x += w * nrm.x;
      y += w * nrm.y;
      // d/dk [w n(u)] = w' n - w * turn * u' * tangent
      dx += dw * nrm.x - w * turn * du * tan.x;
      dy += dw * nrm.y - w * turn * du * tan.y;
    }
    const auto i = static_cast<std::size_t>(k);
    px[i] = x;
    py[i] = y;
    vx[i] = dx;
    vy[i] = dy;

    const double phase = phase_w * t;
    float* row = out.frames.raw() + k * kChannels;
    row[kHeading] = static_cast<float>(
        wrap_angle(std::atan2(s.d1.y, s.d1.x) + static_cast<double>(m.heading_offset)));
    row[kPhaseA] = static_cast<float>(m.limb_amplitude * std::sin(phase));
    row[kPhaseB] = static_cast<float>(m.limb_amplitude * std::cos(phase));
    row[kHeadingRate] = static_cast<float>(turn * du);
  }

  if (m.jitter_sigma != 0.0f) {
    const auto& pat = jitter_pattern();
    const double scale = m.jitter_sigma / kJitterSigma;
    std::vector<double> jx(kFrames), jy(kFrames);
    for (std::size_t i = 0; i < jx.size(); ++i) {
      jx[i] = scale * pat[0][i];
      jy[i] = scale * pat[1][i];
    }
    const auto djx = sampled_derivative(jx), djy = sampled_derivative(jy);
    for (std::size_t i = 0; i < jx.size(); ++i) {
      px[i] += jx[i];
      py[i] += jy[i];
      vx[i] += djx[i];
      vy[i] += djy[i];
    }
  }

  for (std::int64_t k = 0; k < kFrames; ++k) {
    const auto i = static_cast<std::size_t>(k);
    float* row = out.frames.raw() + k * kChannels;
    row[kPosX] = static_cast<float>(px[i]);
    row[kPosY] = static_cast<float>(py[i]);
    row[kVelX] = static_cast<float>(vx[i]);
    row[kVelY] = static_cast<float>(vy[i]);
  }
  return out;
}

MotionSequence cross_synthesize(Content content, Style style, std::uint64_t seed) {
  return synthesize(content, style, seed);
}

num::Tensor position_finite_difference(const num::Tensor& frames) {
  require(frames.shape() == num::Shape{kFrames, kChannels}, ErrorCode::kShapeMismatch,
          "expected [64, 8] frames, got " + num::to_string(frames.shape()));
  num::Tensor d({kFrames, 2});
  for (int c = 0; c < 2; ++c) {
    auto at = [&](std::int64_t k) {
      return static_cast<double>(frames[static_cast<std::size_t>(k * kChannels + c)]);
    };
    for (std::int64_t k = kStencilBegin; k < kStencilEnd; ++k)
      d[static_cast<std::size_t>(k * 2 + c)] = static_cast<float>(stencil_derivative(at, k));
  }
  return d;
}

std::vector<float> velocity_residuals(const num::Tensor& frames) {
  const num::Tensor d = position_finite_difference(frames);
  std::vector<float> r;
  r.reserve(static_cast<std::size_t>(kStencilEnd - kStencilBegin));
  for (std::int64_t k = kStencilBegin; k < kStencilEnd; ++k) {
    const auto row = static_cast<std::size_t>(k * kChannels);
    const double ex = d[static_cast<std::size_t>(k * 2)] - frames[row + kVelX];
    const double ey = d[static_cast<std::size_t>(k * 2 + 1)] - frames[row + kVelY];
    r.push_back(static_cast<float>(std::sqrt(ex * ex + ey * ey)));
  }
  return r;
}

// --- corpora ----------------------------------------------------------------

CorpusSpec CorpusSpec::corpus_a(int per_cell, std::uint64_t base_seed) {
  CorpusSpec s;
  s.id = CorpusId::kA;
  s.contents = all_contents();
  s.styles = {Style::kNeutral};
  s.per_cell = per_cell;
  s.base_seed = base_seed;
  return s;
}

CorpusSpec CorpusSpec::corpus_b(int per_cell, std::uint64_t base_seed) {
  CorpusSpec s;
  s.id = CorpusId::kB;
  s.contents = {Content::kWalkLine, Content::kWalkCircle};
  s.styles = styled_styles();
  s.per_cell = per_cell;
  s.base_seed = base_seed;
  return s;
}

void CorpusSpec::validate() const {
  require(per_cell > 0, ErrorCode::kInvalidArgument, "per_cell must be positive");
  const CorpusSpec ref = id == CorpusId::kA ? corpus_a(per_cell, base_seed)
                                            : corpus_b(per_cell, base_seed);
  require(contents == ref.contents && styles == ref.styles, ErrorCode::kInvalidArgument,
          std::string("corpus ") + (id == CorpusId::kA ? "A" : "B") +
              " label sets violate the corpus definition");
}

std::uint64_t sequence_seed(const CorpusSpec& spec, Content c, Style s, int index) {
  // splitmix64 over a packed cell/index key.
  std::uint64_t z = spec.base_seed ^ (static_cast<std::uint64_t>(spec.id) << 56) ^
                    (static_cast<std::uint64_t>(c) << 48) ^
                    (static_cast<std::uint64_t>(s) << 40) ^ static_cast<std::uint64_t>(index);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<MotionSequence> build_corpus(const CorpusSpec& spec) {
  spec.validate();
  std::vector<MotionSequence> out;
  out.reserve(spec.contents.size() * spec.styles.size() *
              static_cast<std::size_t>(spec.per_cell));
  for (Content c : spec.contents)
    for (Style s : spec.styles)
      for (int i = 0; i < spec.per_cell; ++i)
        out.push_back(synthesize(c, s, sequence_seed(spec, c, s, i)));
  return out;
}

std::vector<MotionSequence> coverage_set(int per_cell, std::uint64_t seed) {
  require(per_cell >= 0, ErrorCode::kInvalidArgument, "per_cell must be non-negative");
  std::vector<MotionSequence> out;
  for (Content c : all_contents())
    for (Style s : all_styles())
      for (int i = 0; i < per_cell; ++i) {
        std::uint64_t z = seed ^ (static_cast<std::uint64_t>(c) << 48) ^
                          (static_cast<std::uint64_t>(s) << 40) ^ static_cast<std::uint64_t>(i);
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        out.push_back(cross_synthesize(c, s, z ^ (z >> 31)));
      }
  return out;
}

num::Tensor Normalization::normalize(const num::Tensor& frames) const {
  require(!frames.empty() && frames.size() % kChannels == 0, ErrorCode::kShapeMismatch,
          "frames must have a trailing channel axis of 8");
  num::Tensor out = frames;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t c = i % kChannels;
    out[i] = (out[i] - mean[c]) / stddev[c];
  }
  return out;
}

num::Tensor Normalization::denormalize(const num::Tensor& frames) const {
  require(!frames.empty() && frames.size() % kChannels == 0, ErrorCode::kShapeMismatch,
          "frames must have a trailing channel axis of 8");
  num::Tensor out = frames;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t c = i % kChannels;
    out[i] = out[i] * stddev[c] + mean[c];
  }
  return out;
}

Normalization compute_normalization(std::span<const MotionSequence> sequences) {
  require(!sequences.empty(), ErrorCode::kInvalidArgument, "no sequences to normalize");
  std::array<double, kChannels> sum{}, sq{};
  double n = 0;
  for (const auto& s : sequences) {
    for (std::int64_t k = 0; k < kFrames; ++k)
      for (int c = 0; c < kChannels; ++c) {
        const double v = s.frames[static_cast<std::size_t>(k * kChannels + c)];
        sum[c] += v;
        sq[c] += v * v;
      }
    n += kFrames;
  }
  Normalization norm;
  for (int c = 0; c < kChannels; ++c) {
    const double mu = sum[c] / n;
    const double var = std::max(sq[c] / n - mu * mu, 0.0);
    norm.mean[c] = static_cast<float>(mu);
    norm.stddev[c] = static_cast<float>(std::max(std::sqrt(var), 1e-6));
  }
  return norm;
}

Normalization corpus_normalization(const CorpusSpec& a, const CorpusSpec& b) {
  auto all = build_corpus(a);
  auto more = build_corpus(b);
  all.insert(all.end(), std::make_move_iterator(more.begin()),
             std::make_move_iterator(more.end()));
  return compute_normalization(all);
}

// --- dataset file ------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'S', 'M', 'D', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::string& what) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(is.gcount() == static_cast<std::streamsize>(sizeof(T)), ErrorCode::kFormat,
          "truncated dataset file (" + what + ")");
  return v;
}

}  // namespace

std::filesystem::path manifest_path(const std::filesystem::path& dataset) {
  auto p = dataset;
  p += ".manifest";
  return p;
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(os), ErrorCode::kIo, "cannot write " + tmp.string());
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(ds.sequences.size()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(kFrames));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(kChannels));
    for (float v : ds.norm.mean) put(os, v);
    for (float v : ds.norm.stddev) put(os, v);
    for (const auto& s : ds.sequences) {
      require(s.frames.shape() == num::Shape{kFrames, kChannels}, ErrorCode::kShapeMismatch,
              "sequence frames must be [64, 8]");
      put<std::uint8_t>(os, static_cast<std::uint8_t>(s.content));
      put<std::uint8_t>(os, static_cast<std::uint8_t>(s.style));
      put<std::uint64_t>(os, s.seed);
      os.write(reinterpret_cast<const char*>(s.frames.raw()),
               static_cast<std::streamsize>(s.frames.size() * sizeof(float)));
    }
    require(static_cast<bool>(os), ErrorCode::kIo, "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);

  std::ofstream man(manifest_path(path), std::ios::trunc);
  require(static_cast<bool>(man), ErrorCode::kIo, "cannot write manifest for " + path.string());
  man << "# smoodi dataset label maps\n";
  for (int i = 0; i < kNumContents; ++i) man << "content " << i << ' ' << kContentNames[i] << '\n';
  for (int i = 0; i < kNumStyles; ++i) man << "style " << i << ' ' << kStyleNames[i] << '\n';
  for (int i = 0; i < kChannels; ++i) man << "channel " << i << ' ' << kChannelNames[i] << '\n';
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::kIo, "cannot open dataset " + path.string());
  char magic[4] = {};
  is.read(magic, 4);
  require(is.gcount() == 4 && std::memcmp(magic, kMagic, 4) == 0, ErrorCode::kFormat,
          path.string() + " is not an SMD1 dataset");
  require(get<std::uint32_t>(is, "version") == kVersion, ErrorCode::kFormat,
          "unsupported dataset version");
  const auto count = get<std::uint32_t>(is, "count");
  require(get<std::uint32_t>(is, "N") == kFrames && get<std::uint32_t>(is, "H") == kChannels,
          ErrorCode::kFormat, "dataset frame geometry is not 64 x 8");
  Dataset ds;
  for (auto& v : ds.norm.mean) v = get<float>(is, "stats");
  for (auto& v : ds.norm.stddev) v = get<float>(is, "stats");
  ds.sequences.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    MotionSequence s;
    s.content = content_from_id(get<std::uint8_t>(is, "content"));
    s.style = style_from_id(get<std::uint8_t>(is, "style"));
    s.seed = get<std::uint64_t>(is, "seed");
    s.frames = num::Tensor({kFrames, kChannels});
    is.read(reinterpret_cast<char*>(s.frames.raw()),
            static_cast<std::streamsize>(s.frames.size() * sizeof(float)));
    require(is.gcount() == static_cast<std::streamsize>(s.frames.size() * sizeof(float)),
            ErrorCode::kFormat, "truncated dataset file (frames)");
    ds.sequences.push_back(std::move(s));
  }
  return ds;
}

Dataset generate_corpus(const CorpusSpec& spec, const Normalization& norm,
                        const std::filesystem::path& path) {
  Dataset ds{norm, build_corpus(spec)};
  write_dataset(path, ds);
  return ds;
}

}  // namespace smoodi::motion
