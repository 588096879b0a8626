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

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "smoodi/error.hpp"
#include "smoodi/motion.hpp"

namespace smoodi::motion {

namespace fs = std::filesystem;

void write_motion_csv(const fs::path& path, const num::Tensor& frames,
                      const std::vector<std::string>& provenance) {
  require(frames.shape() == num::Shape{kFrames, kChannels}, ErrorCode::kShapeMismatch,
          "motion CSV expects [64, 8] frames, got " + num::to_string(frames.shape()));
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  // Write then rename so readers never see a partial file.
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp);
    require(os.good(), ErrorCode::kIo, "cannot write " + path.string());
    for (const auto& line : provenance) os << "# " << line << "\n";
    const auto& names = channel_names();
    for (std::size_t c = 0; c < names.size(); ++c) os << (c ? "," : "") << names[c];
    os << "\n";
    char buf[32];
    for (std::int64_t f = 0; f < kFrames; ++f) {
      for (std::int64_t c = 0; c < kChannels; ++c) {
        std::snprintf(buf, sizeof buf, "%.9g", frames[static_cast<std::size_t>(f * kChannels + c)]);
        os << (c ? "," : "") << buf;
      }
      os << "\n";
    }
    require(os.good(), ErrorCode::kIo, "write failed for " + path.string());
  }
  fs::rename(tmp, path);
}

num::Tensor read_motion_csv(const fs::path& path, std::vector<std::string>* provenance) {
  std::ifstream is(path);
  require(is.good(), ErrorCode::kIo, "cannot read " + path.string());
  num::Tensor out({kFrames, kChannels});
  std::string line;
  bool header = false;
  std::int64_t row = 0;
  int lineno = 0;
  auto where = [&] { return path.string() + ":" + std::to_string(lineno); };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (provenance) provenance->push_back(line.size() > 2 ? line.substr(2) : "");
      continue;
    }
    if (!header) {
      header = true;
      std::stringstream ss(line);
      std::string name;
      std::size_t c = 0;
      while (std::getline(ss, name, ',')) {
        require(c < channel_names().size() && name == channel_names()[c], ErrorCode::kFormat,
                where() + ": unexpected channel header '" + name + "'");
        ++c;
      }
      require(c == channel_names().size(), ErrorCode::kFormat, where() + ": missing channels");
      continue;
    }
    require(row < kFrames, ErrorCode::kFormat, where() + ": more than 64 frames");
    const char* p = line.data();
    const char* end = p + line.size();
    for (std::int64_t c = 0; c < kChannels; ++c) {
      float v = 0;
      const auto r = std::from_chars(p, end, v);
      require(r.ec == std::errc{}, ErrorCode::kFormat, where() + ": bad number");
      out[static_cast<std::size_t>(row * kChannels + c)] = v;
      p = r.ptr;
      if (c + 1 < kChannels) {
        require(p < end && *p == ',', ErrorCode::kFormat, where() + ": expected 8 columns");
        ++p;
      }
    }
    require(p == end, ErrorCode::kFormat, where() + ": trailing data");
    ++row;
  }
  require(header && row == kFrames, ErrorCode::kFormat,
          path.string() + ": expected a header and 64 frames");
  return out;
}

}  // namespace smoodi::motion
