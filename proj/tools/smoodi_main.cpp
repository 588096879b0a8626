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

// smoodi: command-line front end over the C library.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "smoodi/smoodi.h"

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kSeq = SMOODI_FRAMES * SMOODI_CHANNELS;

struct Failure : std::runtime_error {
  Failure(const std::string& what, int code) : std::runtime_error(what), code(code) {}
  int code;
};

void check(smoodi_status s) {
  if (s != SMOODI_OK)
    throw Failure(std::string(smoodi_status_string(s)) + ": " + smoodi_last_error(),
                  static_cast<int>(s));
}

void log_line(const char* line, void*) { std::cerr << line << "\n"; }

struct ConfigDeleter {
  void operator()(smoodi_config* c) const { smoodi_config_destroy(c); }
};
struct PipelineDeleter {
  void operator()(smoodi_pipeline* p) const { smoodi_pipeline_destroy(p); }
};
struct ModelsDeleter {
  void operator()(smoodi_models* m) const { smoodi_models_destroy(m); }
};
using ConfigPtr = std::unique_ptr<smoodi_config, ConfigDeleter>;
using PipelinePtr = std::unique_ptr<smoodi_pipeline, PipelineDeleter>;
using ModelsPtr = std::unique_ptr<smoodi_models, ModelsDeleter>;

struct Globals {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string root;
  bool quiet = false;
};

ConfigPtr make_config(const Globals& g, const std::vector<std::string>& extra = {}) {
  smoodi_config* raw = nullptr;
  check(smoodi_config_create(&raw));
  ConfigPtr c(raw);
  if (!g.config_file.empty()) check(smoodi_config_load_file(c.get(), g.config_file.c_str()));
  for (const auto& kv : g.overrides) check(smoodi_config_set(c.get(), kv.c_str()));
  for (const auto& kv : extra) check(smoodi_config_set(c.get(), kv.c_str()));
  return c;
}

PipelinePtr make_pipeline(const Globals& g, const smoodi_config* c) {
  smoodi_pipeline* raw = nullptr;
  check(smoodi_pipeline_create(c, g.root.empty() ? nullptr : g.root.c_str(),
                               g.quiet ? nullptr : log_line, nullptr, &raw));
  return PipelinePtr(raw);
}

ModelsPtr load_models(const smoodi_pipeline* p, bool with_adaptor, bool allow_mixed) {
  smoodi_models* raw = nullptr;
  check(smoodi_models_load(p, with_adaptor ? 1 : 0, allow_mixed ? 1 : 0, &raw));
  return ModelsPtr(raw);
}

std::string config_hash(const smoodi_config* c) {
  char h[SMOODI_HASH_LEN + 1];
  check(smoodi_config_hash(c, h));
  return h;
}

std::string config_value(const smoodi_config* c, const std::string& key) {
  std::size_t n = 0;
  check(smoodi_config_get(c, key.c_str(), nullptr, 0, &n));
  std::string out(n + 1, '\0');
  check(smoodi_config_get(c, key.c_str(), out.data(), out.size(), nullptr));
  out.resize(n);
  return out;
}

fs::path output_root(const Globals& g) {
  if (!g.root.empty()) return g.root;
  if (const char* env = std::getenv("SMOODI_OUT"); env && *env) return env;
  return "out";
}

int content_id(const std::string& name) {
  int id = 0;
  check(smoodi_content_id(name.c_str(), &id));
  return id;
}

// Style reference: a motion CSV, or a corpus B sequence picked by style name.
struct StyleRef {
  std::string file;
  std::string style;
  std::size_t index = 0;

  void add_options(CLI::App* cmd) {
    auto* f = cmd->add_option("--style-ref", file, "motion CSV used as the style reference")
                  ->check(CLI::ExistingFile);
    auto* s = cmd->add_option("--style", style, "pick a corpus B reference with this style");
    f->excludes(s);
    cmd->add_option("--ref-index", index, "which corpus B sequence of --style (wraps)");
  }
  bool given() const { return !file.empty() || !style.empty(); }
  std::vector<float> load(smoodi_pipeline* p) const {
    std::vector<float> frames(kSeq);
    if (!file.empty()) {
      check(smoodi_motion_read_csv(file.c_str(), frames.data()));
    } else {
      int id = 0;
      check(smoodi_style_id(style.c_str(), &id));
      check(smoodi_pipeline_style_reference(p, id, index, frames.data()));
    }
    return frames;
  }
  std::string describe() const {
    return !file.empty() ? "file:" + file : "corpus-b:" + style + "#" + std::to_string(index);
  }
};

void write_motion(const fs::path& path, const float* frames,
                  const std::vector<std::string>& provenance) {
  std::string text;
  for (const auto& l : provenance) text += l + "\n";
  check(smoodi_motion_write_csv(path.string().c_str(), frames, text.c_str()));
  std::cout << "wrote " << path.string() << "\n";
}

void print_report(const std::string& label, const smoodi_eval_report& r) {
  std::printf("%-22s sra=%.4f sra_guide=%.4f cra=%.4f ffd=%.4f%s diversity=%.4f "
              "kinematic_violation=%.4f samples=%d\n",
              label.c_str(), r.sra, r.sra_guide, r.cra, r.ffd, r.ffd_regularized ? "(reg)" : "",
              r.diversity, r.kinematic_violation, r.samples);
}

smoodi_eval_report evaluate(smoodi_pipeline* p, const smoodi_models* m, bool style,
                            bool adaptor, const fs::path& dir) {
  smoodi_eval_report r{};
  check(smoodi_eval(p, m, style ? 1 : 0, adaptor ? 1 : 0,
                    dir.empty() ? nullptr : dir.string().c_str(), &r));
  return r;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Failure("cannot write " + path.string(), SMOODI_ERR_IO);
  os << text;
  std::cout << "wrote " << path.string() << "\n";
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);)
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string sweep_key(const std::string& param) {
  static const std::map<std::string, std::string> alias{
      {"w_c", "guidance.w_c"},          {"w_s", "guidance.w_s"},
      {"tau", "guidance.tau"},          {"k_early", "guidance.k_early"},
      {"k_late", "guidance.k_late"},    {"t_switch", "guidance.t_switch"},
      {"lambda_pr", "adaptor.lambda_pr"}, {"lambda_cyc", "adaptor.lambda_cyc"},
      {"steps", "sample.steps"}};
  const auto it = alias.find(param);
  return it != alias.end() ? it->second : param;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stylized motion diffusion at desk scale"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("-c,--config", g.config_file, "key=value config file")->check(CLI::ExistingFile);
  app.add_option("-s,--set", g.overrides, "config override key=value (repeatable)");
  app.add_option("-o,--out", g.root, "artifact root (default $SMOODI_OUT or ./out)");
  app.add_flag("-q,--quiet", g.quiet, "no progress lines");

  // Stage commands.
  bool force = false;
  const std::vector<std::pair<std::string, smoodi_stage>> stages{
      {"gen-data", SMOODI_STAGE_DATA},       {"train-codec", SMOODI_STAGE_CODEC},
      {"train-base", SMOODI_STAGE_BASE},     {"train-oracles", SMOODI_STAGE_ORACLES},
      {"train-adaptor", SMOODI_STAGE_ADAPTOR}};
  std::map<CLI::App*, smoodi_stage> stage_cmds;
  const std::map<std::string, std::string> stage_help{
      {"gen-data", "generate corpora A and B"},
      {"train-codec", "train the motion autoencoder"},
      {"train-base", "train the base denoiser on corpus A"},
      {"train-oracles", "train the style and content oracles"},
      {"train-adaptor", "train the style adaptor (base gate first)"}};
  for (const auto& [cmd, stage] : stages) {
    auto* sub = app.add_subcommand(cmd, stage_help.at(cmd));
    sub->add_flag("--force", force, "rerun even if complete");
    stage_cmds[sub] = stage;
  }

  // sample
  auto* sample = app.add_subcommand("sample", "generate one motion");
  std::string content = "walk-line", out_file, trace_file;
  std::uint64_t seed = 0;
  bool no_adaptor = false;
  StyleRef sample_ref;
  sample->add_option("--content", content, "content label");
  sample_ref.add_options(sample);
  sample->add_option("--seed", seed, "noise seed");
  sample->add_option("--out", out_file, "output CSV");
  sample->add_option("--trace", trace_file, "write per-step guidance trace here");
  sample->add_flag("--no-adaptor", no_adaptor, "zero the adaptor residuals");

  // invert
  auto* invert = app.add_subcommand("invert", "invert a motion to its starting noise");
  std::string input, recon_file;
  int steps = 50;
  invert->add_option("--input", input, "motion CSV")->required()->check(CLI::ExistingFile);
  invert->add_option("--content", content, "content label of the input")->required();
  invert->add_option("--steps", steps, "inversion steps");
  invert->add_option("--out", out_file, "latent output file");
  invert->add_option("--reconstruct", recon_file, "regenerate from the latent into this CSV");

  // transfer
  auto* transfer = app.add_subcommand("transfer", "restyle a motion via inversion");
  StyleRef transfer_ref;
  transfer->add_option("--input", input, "content motion CSV")->required()->check(CLI::ExistingFile);
  transfer->add_option("--content", content, "content label of the input")->required();
  transfer_ref.add_options(transfer);
  transfer->add_option("--out", out_file, "output CSV");

  // eval
  auto* eval = app.add_subcommand("eval", "run the evaluation protocol");
  bool allow_mixed = false, no_style = false;
  std::string report_dir;
  eval->add_flag("--allow-mixed", allow_mixed, "accept checkpoints from different configs");
  eval->add_flag("--no-style", no_style, "evaluate the unstyled base pipeline");
  eval->add_flag("--no-adaptor", no_adaptor, "zero the adaptor residuals");
  eval->add_option("--report-dir", report_dir, "where report.txt and samples.csv go");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "compare the default run with one component removed");
  std::string drop;
  ablate->add_option("--drop", drop, "L_pr, L_cyc, L_pr+L_cyc, classifier or adaptor")
      ->required()
      ->check(CLI::IsMember({"L_pr", "L_cyc", "L_pr+L_cyc", "classifier", "adaptor"}));

  // sweep
  auto* sweep = app.add_subcommand("sweep", "evaluate across values of one parameter");
  std::string param, values;
  sweep->add_option("--param", param, "config key or alias (w_s, w_c, tau, lambda_pr, ...)")
      ->required();
  sweep->add_option("--values", values, "comma-separated values")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [sub, stage] : stage_cmds) {
      if (!sub->parsed()) continue;
      const ConfigPtr c = make_config(g);
      const PipelinePtr p = make_pipeline(g, c.get());
      check(smoodi_pipeline_run(p.get(), stage, force ? 1 : 0));
      char dir[4096];
      check(smoodi_pipeline_stage_dir(p.get(), stage, dir, sizeof dir, nullptr));
      std::cout << dir << "\n";
      return 0;
    }

    const ConfigPtr c = make_config(g);
    const PipelinePtr p = make_pipeline(g, c.get());
    const std::string hash = config_hash(c.get());
    const fs::path root = output_root(g);

    if (sample->parsed()) {
      const int cid = content_id(content);
      const ModelsPtr m = load_models(p.get(), sample_ref.given() && !no_adaptor, false);
      std::vector<float> style;
      if (sample_ref.given()) style = sample_ref.load(p.get());
      std::vector<float> frames(kSeq);
      std::vector<std::string> trace;
      smoodi_sample_options o = smoodi_sample_defaults();
      o.use_adaptor = no_adaptor ? 0 : 1;
      if (!trace_file.empty()) {
        o.trace = [](const char* line, void* user) {
          static_cast<std::vector<std::string>*>(user)->push_back(line);
        };
        o.trace_user = &trace;
      }
      double g_final = 0;
      check(smoodi_sample(p.get(), m.get(), &cid, &seed, style.empty() ? nullptr : style.data(),
                          1, &o, frames.data(), &g_final));
      const fs::path path = out_file.empty()
                                ? root / "samples" / (content + "-seed" + std::to_string(seed) + ".csv")
                                : fs::path(out_file);
      std::vector<std::string> prov{"config_hash=" + hash, "seed=" + std::to_string(seed),
                                    "command=sample", "content=" + content,
                                    "style_ref=" + (sample_ref.given() ? sample_ref.describe()
                                                                       : std::string("none")),
                                    "adaptor=" + std::string(no_adaptor ? "off" : "on")};
      if (sample_ref.given()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "G_final=%.9g", g_final);
        prov.emplace_back(buf);
      }
      write_motion(path, frames.data(), prov);
      if (!trace_file.empty()) {
        std::string text;
        for (const auto& l : trace) text += l + "\n";
        write_text(trace_file, text);
      }
      return 0;
    }

    if (invert->parsed()) {
      const int cid = content_id(content);
      const ModelsPtr m = load_models(p.get(), false, false);
      std::vector<float> x(kSeq);
      check(smoodi_motion_read_csv(input.c_str(), x.data()));
      const int d = smoodi_models_latent_dim(m.get());
      std::vector<float> z(static_cast<std::size_t>(d));
      check(smoodi_invert(p.get(), m.get(), x.data(), &cid, 1, steps, z.data()));
      std::ostringstream os;
      os << "# config_hash=" << hash << "\n# command=invert\n# input=" << input
         << "\n# content=" << content << "\n# steps=" << steps << "\n";
      char buf[32];
      for (int i = 0; i < d; ++i) {
        std::snprintf(buf, sizeof buf, "%.9g", z[static_cast<std::size_t>(i)]);
        os << (i ? "," : "") << buf;
      }
      os << "\n";
      write_text(out_file.empty() ? root / "inversions" / (fs::path(input).stem().string() + ".latent")
                                  : fs::path(out_file),
                 os.str());
      if (!recon_file.empty()) {
        std::vector<float> y(kSeq);
        check(smoodi_regenerate(p.get(), m.get(), z.data(), &cid, 1, steps, y.data()));
        double se = 0;
        for (std::size_t i = 0; i < kSeq; ++i) se += double(y[i] - x[i]) * (y[i] - x[i]);
        write_motion(recon_file, y.data(),
                     {"config_hash=" + hash, "command=invert --reconstruct", "input=" + input,
                      "content=" + content, "steps=" + std::to_string(steps)});
        std::printf("round-trip RMSE (raw units) %.6g\n", std::sqrt(se / kSeq));
      }
      return 0;
    }

    if (transfer->parsed()) {
      if (!transfer_ref.given()) throw CLI::RequiredError("--style-ref or --style");
      const int cid = content_id(content);
      const ModelsPtr m = load_models(p.get(), true, false);
      std::vector<float> x(kSeq), y(kSeq);
      check(smoodi_motion_read_csv(input.c_str(), x.data()));
      const std::vector<float> s = transfer_ref.load(p.get());
      double g_final = 0;
      check(smoodi_transfer(p.get(), m.get(), x.data(), &cid, s.data(), 1, y.data(), &g_final));
      char gbuf[64];
      std::snprintf(gbuf, sizeof gbuf, "G_final=%.9g", g_final);
      write_motion(out_file.empty() ? root / "transfers" / (fs::path(input).stem().string() +
                                                            "-transfer.csv")
                                    : fs::path(out_file),
                   y.data(),
                   {"config_hash=" + hash, "seed=none", "command=transfer", "input=" + input,
                    "content=" + content, "style_ref=" + transfer_ref.describe(), gbuf});
      return 0;
    }

    if (eval->parsed()) {
      const ModelsPtr m = load_models(p.get(), !no_style && !no_adaptor, allow_mixed);
      std::string tag = hash;
      if (no_style) tag += "-unstyled";
      if (no_adaptor) tag += "-no-adaptor";
      const fs::path dir = report_dir.empty() ? root / "eval" / tag : fs::path(report_dir);
      print_report("eval", evaluate(p.get(), m.get(), !no_style, !no_adaptor, dir));
      std::cout << "report in " << dir.string() << "\n";
      return 0;
    }

    if (ablate->parsed()) {
      const ModelsPtr m = load_models(p.get(), true, false);
      const smoodi_eval_report base = evaluate(p.get(), m.get(), true, true, {});
      smoodi_eval_report alt{};
      if (drop == "classifier") {
        const ConfigPtr c2 = make_config(g, {"guidance.tau=0"});
        const PipelinePtr p2 = make_pipeline(g, c2.get());
        alt = evaluate(p2.get(), m.get(), true, true, {});
      } else if (drop == "adaptor") {
        alt = evaluate(p.get(), m.get(), true, false, {});
      } else {
        std::vector<std::string> extra;
        if (drop.find("L_pr") != std::string::npos) extra.push_back("adaptor.lambda_pr=0");
        if (drop.find("L_cyc") != std::string::npos) extra.push_back("adaptor.lambda_cyc=0");
        const ConfigPtr c2 = make_config(g, extra);
        const PipelinePtr p2 = make_pipeline(g, c2.get());
        check(smoodi_pipeline_run(p2.get(), SMOODI_STAGE_ADAPTOR, 0));
        const ModelsPtr m2 = load_models(p2.get(), true, false);
        alt = evaluate(p2.get(), m2.get(), true, true, {});
      }
      print_report("default", base);
      print_report("without " + drop, alt);
      char buf[512];
      std::snprintf(buf, sizeof buf,
                    "drop=%s\nconfig_hash=%s\ndefault sra=%.6f cra=%.6f ffd=%.6f\n"
                    "ablated sra=%.6f cra=%.6f ffd=%.6f\ndelta sra=%+.6f cra=%+.6f ffd=%+.6f\n",
                    drop.c_str(), hash.c_str(), base.sra, base.cra, base.ffd, alt.sra, alt.cra,
                    alt.ffd, alt.sra - base.sra, alt.cra - base.cra, alt.ffd - base.ffd);
      std::string name = drop;
      for (auto& ch : name)
        if (ch == '+') ch = '-';
      write_text(root / "ablations" / (name + "-" + hash + ".txt"), buf);
      return 0;
    }

    if (sweep->parsed()) {
      const std::string key = sweep_key(param);
      config_value(c.get(), key);  // unknown keys fail here, before any work
      const bool retrain = key.rfind("adaptor.", 0) == 0;
      std::string csv = "# config_hash=" + hash + "\n# param=" + key + "\n" + key +
                        ",sra,sra_guide,cra,ffd,diversity,kinematic_violation\n";
      ModelsPtr shared;
      if (!retrain) shared = load_models(p.get(), true, false);
      for (const auto& v : split(values, ',')) {
        const ConfigPtr c2 = make_config(g, {key + "=" + v});
        const PipelinePtr p2 = make_pipeline(g, c2.get());
        ModelsPtr own;
        if (retrain) {
          check(smoodi_pipeline_run(p2.get(), SMOODI_STAGE_ADAPTOR, 0));
          own = load_models(p2.get(), true, false);
        }
        const smoodi_eval_report r =
            evaluate(p2.get(), retrain ? own.get() : shared.get(), true, true, {});
        print_report(key + "=" + v, r);
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", v.c_str(), r.sra,
                      r.sra_guide, r.cra, r.ffd, r.diversity, r.kinematic_violation);
        csv += buf;
      }
      write_text(root / "sweeps" / (param + "-" + hash + ".csv"), csv);
      return 0;
    }
  } catch (const Failure& f) {
    std::cerr << "smoodi: " << f.what() << "\n";
    return f.code == 0 ? 1 : f.code;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "smoodi: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
