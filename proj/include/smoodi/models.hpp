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

#include <optional>

#include "smoodi/adaptor.hpp"
#include "smoodi/codec.hpp"
#include "smoodi/denoiser.hpp"
#include "smoodi/motion.hpp"
#include "smoodi/oracle.hpp"
#include "smoodi/schedule.hpp"

namespace smoodi {

/// Everything inference and evaluation read. Frozen once loaded.
struct ModelSet {
  NoiseSchedule schedule;
  motion::Normalization norm;
  Codec codec;
  Denoiser base;
  std::optional<Adaptor> adaptor;
  Oracle style_oracle;       ///< f for guidance
  Oracle eval_style_oracle;  ///< independently seeded, SRA only
  Oracle content_oracle;
};

}  // namespace smoodi
