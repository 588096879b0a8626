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

#include "smoodi/smoodi.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <new>
#include <optional>
#include <sstream>
#include <streambuf>

#include "smoodi/error.hpp"
#include "smoodi/pipeline.hpp"

using namespace smoodi;
using num::Tensor;

namespace {

thread_local std::string g_last_error;

constexpr std::size_t kSeqSize = motion::kFrames * motion::kChannels;

// Forwards complete lines to a smoodi_line_fn.
class LineBuf : public std::streambuf {
 public:
  LineBuf(smoodi_line_fn fn, void* user) : fn_(fn), user_(user) {}
  ~LineBuf() override { flush_line(); }

 protected:
  int overflow(int ch) override {
    if (ch == '\n') {
      flush_line();
    } else if (ch != traits_type::eof()) {
      line_.push_back(static_cast<char>(ch));
    }
    return ch;
  }

 private:
  void flush_line() {
    if (!line_.empty() && fn_) fn_(line_.c_str(), user_);
    line_.clear();
  }
  smoodi_line_fn fn_;
  void* user_;
  std::string line_;
};

smoodi_status to_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::kInvalidArgument: return SMOODI_ERR_INVALID_ARGUMENT;
    case ErrorCode::kShapeMismatch: return SMOODI_ERR_SHAPE;
    case ErrorCode::kNonFinite: return SMOODI_ERR_NON_FINITE;
    case ErrorCode::kIo: return SMOODI_ERR_IO;
    case ErrorCode::kFormat: return SMOODI_ERR_FORMAT;
    case ErrorCode::kConfig: return SMOODI_ERR_CONFIG;
    case ErrorCode::kMissingStage: return SMOODI_ERR_MISSING_STAGE;
    case ErrorCode::kChecksumMismatch: return SMOODI_ERR_CHECKSUM;
    case ErrorCode::kGateFailed: return SMOODI_ERR_GATE;
    case ErrorCode::kMixedCheckpoints: return SMOODI_ERR_MIXED_CHECKPOINTS;
    case ErrorCode::kInternal: return SMOODI_ERR_INTERNAL;
  }
  return SMOODI_ERR_INTERNAL;
}

template <typename F>
smoodi_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return SMOODI_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown failure";
  }
  return SMOODI_ERR_INTERNAL;
}

void need(const void* p, const char* what) {
  require(p != nullptr, ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
}

void copy_string(const std::string& s, char* buf, std::size_t cap, std::size_t* needed) {
  if (needed) *needed = s.size();
  if (buf && cap) {
    const std::size_t n = std::min(cap - 1, s.size());
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
  }
}

void copy_hash(const std::string& h, char* out) {
  need(out, "out");
  std::memcpy(out, h.data(), std::min<std::size_t>(h.size(), SMOODI_HASH_LEN));
  out[SMOODI_HASH_LEN] = '\0';
}

Stage to_stage(smoodi_stage s) {
  require(s >= SMOODI_STAGE_DATA && s <= SMOODI_STAGE_ADAPTOR, ErrorCode::kInvalidArgument,
          "unknown stage");
  return static_cast<Stage>(s);
}

}  // namespace

struct smoodi_config {
  RunConfig config;
};

struct smoodi_pipeline {
  smoodi_pipeline(const RunConfig& c, std::filesystem::path root, smoodi_line_fn fn, void* user)
      : buf(fn, user), log(&buf), pipe(c, std::move(root), &log) {}
  LineBuf buf;
  std::ostream log;
  Pipeline pipe;
  std::mutex data_mu;
  std::optional<TrainingData> data;

  const TrainingData& training_data() {
    std::lock_guard lock(data_mu);
    if (!data) data = pipe.training_data();
    return *data;
  }
  const TrainingData& training_data() const {
    return const_cast<smoodi_pipeline*>(this)->training_data();
  }
};

struct smoodi_models {
  ModelSet models;
};

namespace {

// Raw frames -> normalized [n, 64, 8].
Tensor normalized(const smoodi_pipeline* p, const float* frames, std::size_t n) {
  need(frames, "frames");
  Tensor raw({static_cast<std::int64_t>(n), motion::kFrames, motion::kChannels});
  std::memcpy(raw.mutable_data().data(), frames, n * kSeqSize * sizeof(float));
  require(raw.all_finite(), ErrorCode::kNonFinite, "input frames contain non-finite values");
  return p->training_data().norm.normalize(raw);
}

void write_frames(const smoodi_pipeline* p, const Tensor& normalized_frames, float* out) {
  need(out, "out_frames");
  const Tensor raw = p->training_data().norm.denormalize(normalized_frames);
  std::memcpy(out, raw.data().data(), raw.size() * sizeof(float));
}

std::vector<int> contents(const int* content, std::size_t n) {
  need(content, "content");
  return std::vector<int>(content, content + n);
}

}  // namespace

extern "C" {

const char* smoodi_version(void) { return "0.1.0"; }

const char* smoodi_status_string(smoodi_status s) {
  switch (s) {
    case SMOODI_OK: return "ok";
    case SMOODI_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SMOODI_ERR_SHAPE: return "shape mismatch";
    case SMOODI_ERR_NON_FINITE: return "non-finite value";
    case SMOODI_ERR_IO: return "i/o error";
    case SMOODI_ERR_FORMAT: return "format error";
    case SMOODI_ERR_CONFIG: return "config error";
    case SMOODI_ERR_MISSING_STAGE: return "missing stage";
    case SMOODI_ERR_CHECKSUM: return "checksum mismatch";
    case SMOODI_ERR_GATE: return "gate failed";
    case SMOODI_ERR_MIXED_CHECKPOINTS: return "mixed checkpoints";
    case SMOODI_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* smoodi_last_error(void) { return g_last_error.c_str(); }

const char* smoodi_content_name(int id) {
  if (id < 0 || id >= motion::kNumContents) return nullptr;
  return motion::name(motion::content_from_id(id)).data();
}

const char* smoodi_style_name(int id) {
  if (id < 0 || id >= motion::kNumStyles) return nullptr;
  return motion::name(motion::style_from_id(id)).data();
}

smoodi_status smoodi_content_id(const char* name, int* id) {
  return guarded([&] {
    need(name, "name");
    need(id, "id");
    *id = static_cast<int>(motion::parse_content(name));
  });
}

smoodi_status smoodi_style_id(const char* name, int* id) {
  return guarded([&] {
    need(name, "name");
    need(id, "id");
    *id = static_cast<int>(motion::parse_style(name));
  });
}

// --- config ---------------------------------------------------------------------

smoodi_status smoodi_config_create(smoodi_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new smoodi_config{};
  });
}

void smoodi_config_destroy(smoodi_config* c) { delete c; }

smoodi_status smoodi_config_load_file(smoodi_config* c, const char* path) {
  return guarded([&] {
    need(c, "config");
    need(path, "path");
    c->config.load_file(path);
  });
}

smoodi_status smoodi_config_set(smoodi_config* c, const char* assignment) {
  return guarded([&] {
    need(c, "config");
    need(assignment, "assignment");
    c->config.assign(assignment);
  });
}

smoodi_status smoodi_config_get(const smoodi_config* c, const char* key, char* buf,
                                size_t cap, size_t* needed) {
  return guarded([&] {
    need(c, "config");
    need(key, "key");
    copy_string(c->config.get(key), buf, cap, needed);
  });
}

smoodi_status smoodi_config_hash(const smoodi_config* c, char out[SMOODI_HASH_LEN + 1]) {
  return guarded([&] {
    need(c, "config");
    copy_hash(c->config.hash(), out);
  });
}

smoodi_status smoodi_config_echo(const smoodi_config* c, smoodi_line_fn fn, void* user) {
  return guarded([&] {
    need(c, "config");
    need(reinterpret_cast<const void*>(fn), "fn");
    for (const auto& line : c->config.echo()) fn(line.c_str(), user);
  });
}

// --- pipeline -------------------------------------------------------------------

smoodi_status smoodi_pipeline_create(const smoodi_config* c, const char* root,
                                     smoodi_line_fn log, void* log_user,
                                     smoodi_pipeline** out) {
  return guarded([&] {
    need(c, "config");
    need(out, "out");
    *out = new smoodi_pipeline(c->config, root ? std::filesystem::path(root)
                                               : Pipeline::default_root(),
                               log, log_user);
  });
}

void smoodi_pipeline_destroy(smoodi_pipeline* p) { delete p; }

smoodi_status smoodi_pipeline_run(smoodi_pipeline* p, smoodi_stage stage, int force) {
  return guarded([&] {
    need(p, "pipeline");
    p->pipe.run(to_stage(stage), force != 0);
    p->log.flush();
  });
}

smoodi_status smoodi_pipeline_stage_dir(const smoodi_pipeline* p, smoodi_stage stage, char* buf,
                                        size_t cap, size_t* needed) {
  return guarded([&] {
    need(p, "pipeline");
    copy_string(p->pipe.stage_dir(to_stage(stage)).string(), buf, cap, needed);
  });
}

smoodi_status smoodi_pipeline_stage_hash(const smoodi_pipeline* p, smoodi_stage stage,
                                         char out[SMOODI_HASH_LEN + 1]) {
  return guarded([&] {
    need(p, "pipeline");
    copy_hash(p->pipe.stage_hash(to_stage(stage)), out);
  });
}

smoodi_status smoodi_pipeline_complete(const smoodi_pipeline* p, smoodi_stage stage,
                                       int* complete) {
  return guarded([&] {
    need(p, "pipeline");
    need(complete, "complete");
    *complete = p->pipe.complete(to_stage(stage)) ? 1 : 0;
  });
}

smoodi_status smoodi_pipeline_base_gate(smoodi_pipeline* p, double* cra) {
  return guarded([&] {
    need(p, "pipeline");
    try {
      const double v = p->pipe.check_base_gate();
      if (cra) *cra = v;
    } catch (const Error& e) {
      // The measured value is cached next to the base checkpoint.
      if (e.code() == ErrorCode::kGateFailed && cra) {
        std::ifstream is(p->pipe.stage_dir(Stage::kBase) / "gate.txt");
        std::string line;
        while (std::getline(is, line))
          if (line.rfind("cra=", 0) == 0) *cra = std::stod(line.substr(4));
      }
      throw;
    }
  });
}

smoodi_status smoodi_pipeline_style_reference(smoodi_pipeline* p, int style, size_t index,
                                              float* frames) {
  return guarded([&] {
    need(p, "pipeline");
    need(frames, "frames");
    const motion::Style s = motion::style_from_id(style);
    std::vector<const motion::MotionSequence*> pool;
    for (const auto& seq : p->training_data().b)
      if (seq.style == s) pool.push_back(&seq);
    require(!pool.empty(), ErrorCode::kInvalidArgument,
            "corpus B holds no sequence with style " + std::string(motion::name(s)));
    const auto& pick = *pool[index % pool.size()];
    std::memcpy(frames, pick.frames.data().data(), kSeqSize * sizeof(float));
  });
}

// --- models ---------------------------------------------------------------------

smoodi_status smoodi_models_load(const smoodi_pipeline* p, int with_adaptor, int allow_mixed,
                                 smoodi_models** out) {
  return guarded([&] {
    need(p, "pipeline");
    need(out, "out");
    *out = new smoodi_models{p->pipe.load_models(with_adaptor != 0, allow_mixed != 0)};
  });
}

void smoodi_models_destroy(smoodi_models* m) { delete m; }

int smoodi_models_latent_dim(const smoodi_models* m) {
  return m ? m->models.codec.latent_dim() : 0;
}

smoodi_sample_options smoodi_sample_defaults(void) {
  smoodi_sample_options o;
  o.use_adaptor = 1;
  o.trace = nullptr;
  o.trace_user = nullptr;
  return o;
}

smoodi_status smoodi_sample(const smoodi_pipeline* p, const smoodi_models* m,
                            const int* content, const uint64_t* seeds,
                            const float* style_frames, size_t n,
                            const smoodi_sample_options* options, float* out_frames,
                            double* g_final) {
  return guarded([&] {
    need(p, "pipeline");
    need(m, "models");
    need(seeds, "seeds");
    require(n > 0, ErrorCode::kInvalidArgument, "n must be positive");
    const smoodi_sample_options o = options ? *options : smoodi_sample_defaults();
    SampleRequest r;
    r.content = contents(content, n);
    r.seeds.assign(seeds, seeds + n);
    if (style_frames) r.style = normalized(p, style_frames, n);
    r.weights = p->pipe.guidance_weights();
    r.guidance = p->pipe.guidance_config();
    r.steps = p->pipe.config().get_int("sample.steps");
    r.use_adaptor = o.use_adaptor != 0;
    r.trace = o.trace != nullptr;
    require(!r.style || !r.use_adaptor || m->models.adaptor, ErrorCode::kInvalidArgument,
            "a style reference with the adaptor on needs models loaded with the adaptor");
    const SampleOutput out = sample(r, m->models);
    for (const auto& line : out.trace) o.trace(line.c_str(), o.trace_user);
    write_frames(p, out.frames, out_frames);
    if (g_final)
      for (std::size_t i = 0; i < out.g_final.size(); ++i) g_final[i] = out.g_final[i];
  });
}

smoodi_status smoodi_invert(const smoodi_pipeline* p, const smoodi_models* m,
                            const float* frames, const int* content, size_t n, int steps,
                            float* z_T) {
  return guarded([&] {
    need(p, "pipeline");
    need(m, "models");
    need(z_T, "z_T");
    require(n > 0, ErrorCode::kInvalidArgument, "n must be positive");
    const Tensor z = ddim_invert(m->models, normalized(p, frames, n), contents(content, n), steps,
                                 1.0f);
    std::memcpy(z_T, z.data().data(), z.size() * sizeof(float));
  });
}

smoodi_status smoodi_regenerate(const smoodi_pipeline* p, const smoodi_models* m,
                                const float* z_T, const int* content, size_t n, int steps,
                                float* out_frames) {
  return guarded([&] {
    need(p, "pipeline");
    need(m, "models");
    need(z_T, "z_T");
    require(n > 0, ErrorCode::kInvalidArgument, "n must be positive");
    const std::int64_t d = m->models.codec.latent_dim();
    Tensor z({static_cast<std::int64_t>(n), d});
    std::memcpy(z.mutable_data().data(), z_T, z.size() * sizeof(float));
    SampleRequest r;
    r.content = contents(content, n);
    r.z_T = z;
    r.weights = {1.0f, 0.0f};
    r.guidance.tau = 0.0f;
    r.steps = steps;
    write_frames(p, sample(r, m->models).frames, out_frames);
  });
}

smoodi_status smoodi_transfer(const smoodi_pipeline* p, const smoodi_models* m,
                              const float* content_frames, const int* content,
                              const float* style_frames, size_t n, float* out_frames,
                              double* g_final) {
  return guarded([&] {
    need(p, "pipeline");
    need(m, "models");
    require(n > 0, ErrorCode::kInvalidArgument, "n must be positive");
    require(m->models.adaptor.has_value(), ErrorCode::kInvalidArgument,
            "transfer needs models loaded with the adaptor");
    const SampleOutput out =
        style_transfer(m->models, normalized(p, content_frames, n), contents(content, n),
                       normalized(p, style_frames, n), p->pipe.transfer_config());
    write_frames(p, out.frames, out_frames);
    if (g_final)
      for (std::size_t i = 0; i < out.g_final.size(); ++i) g_final[i] = out.g_final[i];
  });
}

smoodi_status smoodi_eval(smoodi_pipeline* p, const smoodi_models* m, int use_style,
                          int use_adaptor, const char* report_dir, smoodi_eval_report* out) {
  return guarded([&] {
    need(p, "pipeline");
    need(m, "models");
    need(out, "out");
    EvalConfig e = p->pipe.eval_config();
    e.use_style = use_style != 0;
    e.use_adaptor = use_adaptor != 0;
    require(!e.use_style || !e.use_adaptor || m->models.adaptor, ErrorCode::kInvalidArgument,
            "styled evaluation with the adaptor needs models loaded with the adaptor");
    const EvalReport r = run_eval(m->models, p->training_data().b, e);
    if (report_dir) {
      const std::filesystem::path dir(report_dir);
      std::filesystem::create_directories(dir);
      std::vector<std::string> echo{"config_hash=" + p->pipe.config().hash(),
                                    "use_style=" + std::to_string(e.use_style),
                                    "use_adaptor=" + std::to_string(e.use_adaptor)};
      for (const auto& line : p->pipe.config().echo()) echo.push_back(line);
      write_eval_report(dir / "report.txt", r, echo);
      write_eval_samples(dir / "samples.csv", r);
    }
    out->sra = r.sra;
    out->sra_guide = r.sra_guide;
    out->cra = r.cra;
    out->ffd = r.ffd;
    out->ffd_regularized = r.ffd_regularized ? 1 : 0;
    out->diversity = r.diversity;
    out->kinematic_violation = r.kinematic_violation;
    out->samples = r.samples;
  });
}

// --- motion files ---------------------------------------------------------------

smoodi_status smoodi_motion_write_csv(const char* path, const float* frames,
                                      const char* provenance) {
  return guarded([&] {
    need(path, "path");
    need(frames, "frames");
    Tensor t({motion::kFrames, motion::kChannels});
    std::memcpy(t.mutable_data().data(), frames, kSeqSize * sizeof(float));
    std::vector<std::string> lines;
    if (provenance) {
      std::stringstream ss(provenance);
      for (std::string l; std::getline(ss, l);) lines.push_back(l);
    }
    motion::write_motion_csv(path, t, lines);
  });
}

smoodi_status smoodi_motion_read_csv(const char* path, float* frames) {
  return guarded([&] {
    need(path, "path");
    need(frames, "frames");
    const Tensor t = motion::read_motion_csv(path);
    std::memcpy(frames, t.data().data(), kSeqSize * sizeof(float));
  });
}

}  // extern "C"
