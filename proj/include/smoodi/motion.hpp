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

// Procedural stylized trajectories.
//
// A sequence is 64 frames x 8 channels. Content picks the path shape, style
// applies a closed-form modulation, and the seed draws a small amount of
// per-sequence variation (speed, path scale, cadence). Corpus A holds every
// content in the neutral style; corpus B holds the seven non-neutral styles
// over the two walking contents only.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smoodi/numerics/tensor.hpp"

namespace smoodi::motion {

inline constexpr std::int64_t kFrames = 64;
inline constexpr std::int64_t kChannels = 8;

enum class Content : std::uint8_t {
  kWalkLine = 0,
  kWalkCircle,
  kZigzag,
  kFigureEight,
  kStopGo,
  kSpiral,
};
inline constexpr int kNumContents = 6;

enum class Style : std::uint8_t {
  kNeutral = 0,
  kWobble,
  kHurried,
  kSlowDrag,
  kLeanLeft,
  kJitter,
  kExaggeratedPhase,
  kTiptoeShortStep,
};
inline constexpr int kNumStyles = 8;

enum Channel : int {
  kPosX = 0,
  kPosY,
  kHeading,
  kPhaseA,
  kPhaseB,
  kVelX,
  kVelY,
  kHeadingRate,
};

std::string_view name(Content c);
std::string_view name(Style s);
Content parse_content(std::string_view s);
Style parse_style(std::string_view s);
Content content_from_id(int id);
Style style_from_id(int id);
const std::array<std::string_view, kChannels>& channel_names();

std::vector<Content> all_contents();
std::vector<Style> all_styles();
/// The seven styles of corpus B.
std::vector<Style> styled_styles();

/// Documented closed-form style modulation.
struct StyleModulation {
  float speed = 1.0f;           ///< multiplies path traversal rate
  float phase_rate = 1.0f;      ///< multiplies limb cadence
  float limb_amplitude = 1.0f;  ///< multiplies limb phase amplitude
  float heading_offset = 0.0f;  ///< radians added to heading
  float wobble_amplitude = 0.0f;
  float jitter_sigma = 0.0f;
};
StyleModulation modulation(Style s);

inline constexpr float kBaseSpeed = 0.15f;            // units per frame
inline constexpr float kWobbleAmplitude = 0.3f;       // lateral units
inline constexpr float kWobblePeriodFrames = 20.0f;
inline constexpr float kJitterSigma = 0.05f;
inline constexpr float kStridePeriodFrames = 16.0f;

struct MotionSequence {
  num::Tensor frames;  ///< [kFrames, kChannels], raw (denormalized) units
  Content content = Content::kWalkLine;
  Style style = Style::kNeutral;
  std::uint64_t seed = 0;
};

/// Deterministic in (content, style, seed).
MotionSequence synthesize(Content content, Style style, std::uint64_t seed);

/// Same generator; exists for arbitrary (content, style) cells, including
/// ones no corpus contains.
MotionSequence cross_synthesize(Content content, Style style, std::uint64_t seed);

/// Position derivative estimated from the position channels with a 7-point
/// central stencil; [kFrames, 2], zero outside frames [3, kFrames - 4].
num::Tensor position_finite_difference(const num::Tensor& frames);
/// First and one-past-last frame covered by position_finite_difference.
inline constexpr std::int64_t kStencilBegin = 3;
inline constexpr std::int64_t kStencilEnd = kFrames - 3;

/// Per-frame |FD(position) - stored velocity| (Euclidean) over the stencil
/// range.
std::vector<float> velocity_residuals(const num::Tensor& frames);

// --- corpora -----------------------------------------------------------------

enum class CorpusId : std::uint8_t { kA = 0, kB = 1 };

struct CorpusSpec {
  CorpusId id = CorpusId::kA;
  std::vector<Content> contents;
  std::vector<Style> styles;
  int per_cell = 50;
  std::uint64_t base_seed = 0;

  static CorpusSpec corpus_a(int per_cell, std::uint64_t base_seed);
  static CorpusSpec corpus_b(int per_cell, std::uint64_t base_seed);
  /// Throws unless the A/B label invariants hold.
  void validate() const;
};

std::uint64_t sequence_seed(const CorpusSpec& spec, Content c, Style s, int index);
std::vector<MotionSequence> build_corpus(const CorpusSpec& spec);

/// `per_cell` sequences for every (content, style) cell, including cells no
/// corpus holds. Used to widen codec and oracle training coverage.
std::vector<MotionSequence> coverage_set(int per_cell, std::uint64_t seed);

struct Normalization {
  std::array<float, kChannels> mean{};
  std::array<float, kChannels> stddev{};

  num::Tensor normalize(const num::Tensor& frames) const;
  num::Tensor denormalize(const num::Tensor& frames) const;
};

/// Per-channel mean / std over all frames of all sequences.
Normalization compute_normalization(std::span<const MotionSequence> sequences);

struct Dataset {
  Normalization norm;
  std::vector<MotionSequence> sequences;
};

// Dataset file: "SMD1", u32 version=1, u32 count, u32 N, u32 H, 2H f32
// stats (mean then std), then per sequence u8 content, u8 style, u64 seed,
// N*H f32 frames. All little-endian. A sidecar `<file>.manifest` lists the
// label-name <-> id maps.
void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& path);
std::filesystem::path manifest_path(const std::filesystem::path& dataset);

/// Builds the corpus for `spec`, stamps `norm` into the header and writes it.
Dataset generate_corpus(const CorpusSpec& spec, const Normalization& norm,
                        const std::filesystem::path& path);

/// Normalization statistics over A union B.
Normalization corpus_normalization(const CorpusSpec& a, const CorpusSpec& b);

// Motion CSV: `# key=value` comment lines, a header naming the channels,
// then one row of kChannels %.9g values per frame (round-trips f32 exactly).
void write_motion_csv(const std::filesystem::path& path, const num::Tensor& frames,
                      const std::vector<std::string>& provenance = {});
/// Returns [kFrames, kChannels]. `provenance`, when given, receives the
/// comment lines without the leading "# ".
num::Tensor read_motion_csv(const std::filesystem::path& path,
                            std::vector<std::string>* provenance = nullptr);

}  // namespace smoodi::motion
