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

// Exercises the shared library through its C header only.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "smoodi/smoodi.h"

namespace fs = std::filesystem;

namespace {

fs::path fresh(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("smoodi_capi_" + name);
  fs::remove_all(p);
  return p;
}

struct Config {
  Config() { EXPECT_EQ(smoodi_config_create(&c), SMOODI_OK); }
  ~Config() { smoodi_config_destroy(c); }
  smoodi_config* c = nullptr;
};

}  // namespace

TEST(CApi, StatusStringsAndVersion) {
  EXPECT_STREQ(smoodi_status_string(SMOODI_OK), "ok");
  EXPECT_STREQ(smoodi_status_string(SMOODI_ERR_MISSING_STAGE), "missing stage");
  EXPECT_GT(std::strlen(smoodi_version()), 0u);
}

TEST(CApi, Labels) {
  int id = -1;
  ASSERT_EQ(smoodi_content_id("walk-circle", &id), SMOODI_OK);
  EXPECT_EQ(id, 1);
  EXPECT_STREQ(smoodi_content_name(id), "walk-circle");
  ASSERT_EQ(smoodi_style_id("hurried", &id), SMOODI_OK);
  EXPECT_STREQ(smoodi_style_name(id), "hurried");
  EXPECT_EQ(smoodi_style_id("sleepy", &id), SMOODI_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(smoodi_last_error()).find("sleepy"), std::string::npos);
  EXPECT_EQ(smoodi_content_name(SMOODI_NO_CONTENT), nullptr);
  EXPECT_EQ(smoodi_style_name(-1), nullptr);
}

TEST(CApi, ConfigRoundTrip) {
  Config cfg;
  EXPECT_EQ(smoodi_config_set(cfg.c, "guidance.w_s=2.5"), SMOODI_OK);
  char buf[8];
  std::size_t need = 0;
  ASSERT_EQ(smoodi_config_get(cfg.c, "guidance.w_s", buf, sizeof buf, &need), SMOODI_OK);
  EXPECT_STREQ(buf, "2.5");
  EXPECT_EQ(need, 3u);
  char small[3];
  ASSERT_EQ(smoodi_config_get(cfg.c, "guidance.grad_mode", small, sizeof small, &need),
            SMOODI_OK);
  EXPECT_STREQ(small, "cl");  // truncated, NUL-terminated
  EXPECT_EQ(need, std::strlen("clean-prediction"));
  EXPECT_EQ(smoodi_config_set(cfg.c, "guidance.w_z=1"), SMOODI_ERR_CONFIG);
  EXPECT_EQ(smoodi_config_set(nullptr, "a=1"), SMOODI_ERR_INVALID_ARGUMENT);

  char h1[SMOODI_HASH_LEN + 1], h2[SMOODI_HASH_LEN + 1];
  ASSERT_EQ(smoodi_config_hash(cfg.c, h1), SMOODI_OK);
  EXPECT_EQ(std::strlen(h1), static_cast<std::size_t>(SMOODI_HASH_LEN));
  smoodi_config_set(cfg.c, "guidance.w_s=1.5");
  smoodi_config_hash(cfg.c, h2);
  EXPECT_STRNE(h1, h2);

  std::vector<std::string> lines;
  ASSERT_EQ(smoodi_config_echo(
                cfg.c,
                [](const char* l, void* u) { static_cast<std::vector<std::string>*>(u)->push_back(l); },
                &lines),
            SMOODI_OK);
  EXPECT_GT(lines.size(), 50u);
  EXPECT_TRUE(std::is_sorted(lines.begin(), lines.end()));
}

TEST(CApi, MotionCsvRoundTripIsBitExact) {
  std::vector<float> x(SMOODI_FRAMES * SMOODI_CHANNELS), y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::ldexp(static_cast<float>(i * 2654435761u % 100003) / 100003.0f - 0.5f,
                      static_cast<int>(i % 17) - 8);
  const fs::path p = fresh("motion") / "m.csv";
  ASSERT_EQ(smoodi_motion_write_csv(p.c_str(), x.data(), "config_hash=abc\nseed=3"), SMOODI_OK);
  ASSERT_EQ(smoodi_motion_read_csv(p.c_str(), y.data()), SMOODI_OK);
  EXPECT_EQ(std::memcmp(x.data(), y.data(), x.size() * sizeof(float)), 0);
  EXPECT_EQ(smoodi_motion_read_csv("/nonexistent/m.csv", y.data()), SMOODI_ERR_IO);
}

TEST(CApi, PipelineStagesAndMissingDependencies) {
  Config cfg;
  const fs::path root = fresh("pipe");
  smoodi_pipeline* p = nullptr;
  ASSERT_EQ(smoodi_pipeline_create(cfg.c, root.c_str(), nullptr, nullptr, &p), SMOODI_OK);
  smoodi_models* m = nullptr;
  EXPECT_EQ(smoodi_models_load(p, 0, 0, &m), SMOODI_ERR_MISSING_STAGE);
  EXPECT_NE(std::string(smoodi_last_error()).find("gen-data"), std::string::npos);
  EXPECT_EQ(smoodi_pipeline_run(p, SMOODI_STAGE_CODEC, 0), SMOODI_ERR_MISSING_STAGE);

  int done = -1;
  ASSERT_EQ(smoodi_pipeline_run(p, SMOODI_STAGE_DATA, 0), SMOODI_OK);
  ASSERT_EQ(smoodi_pipeline_complete(p, SMOODI_STAGE_DATA, &done), SMOODI_OK);
  EXPECT_EQ(done, 1);
  char dir[1024];
  ASSERT_EQ(smoodi_pipeline_stage_dir(p, SMOODI_STAGE_DATA, dir, sizeof dir, nullptr), SMOODI_OK);
  EXPECT_TRUE(fs::exists(fs::path(dir) / "stage.txt"));
  char h[SMOODI_HASH_LEN + 1];
  ASSERT_EQ(smoodi_pipeline_stage_hash(p, SMOODI_STAGE_DATA, h), SMOODI_OK);
  EXPECT_EQ(fs::path(dir).filename().string(), h);

  int hurried = 0;
  smoodi_style_id("hurried", &hurried);
  std::vector<float> a(SMOODI_FRAMES * SMOODI_CHANNELS), b(a.size());
  ASSERT_EQ(smoodi_pipeline_style_reference(p, hurried, 0, a.data()), SMOODI_OK);
  ASSERT_EQ(smoodi_pipeline_style_reference(p, hurried, 100, b.data()), SMOODI_OK);
  EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(float)), 0);  // wraps at 100
  EXPECT_EQ(smoodi_pipeline_style_reference(p, 0, 0, a.data()), SMOODI_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(smoodi_pipeline_run(p, static_cast<smoodi_stage>(9), 0), SMOODI_ERR_INVALID_ARGUMENT);
  smoodi_pipeline_destroy(p);
}

TEST(CApi, NullHandlesAreRejected) {
  double cra = 0;
  EXPECT_EQ(smoodi_pipeline_base_gate(nullptr, &cra), SMOODI_ERR_INVALID_ARGUMENT);
  smoodi_eval_report r{};
  EXPECT_EQ(smoodi_eval(nullptr, nullptr, 1, 1, nullptr, &r), SMOODI_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(smoodi_models_latent_dim(nullptr), 0);
  smoodi_models_destroy(nullptr);
  smoodi_pipeline_destroy(nullptr);
  smoodi_config_destroy(nullptr);
}
