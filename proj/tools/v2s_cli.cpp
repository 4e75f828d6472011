// Copyright 2026 The V2S Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end over the v2s C API.

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "v2s/v2s.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;

int report(v2s_status status) {
  if (status == V2S_OK) return kExitOk;
  std::fprintf(stderr, "v2s: %s: %s\n", v2s_status_name(status), v2s_last_error());
  return status == V2S_ERR_CONFIG ? kExitConfig : kExitError;
}

struct ConfigDeleter {
  void operator()(v2s_config* c) const { v2s_config_free(c); }
};
using ConfigPtr = std::unique_ptr<v2s_config, ConfigDeleter>;

struct CommonOptions {
  std::string config_path;
  int resolution = 0;
  std::string out;
  int workers = -1;
  double mls_radius = -1.0;
};

// Loads the configuration, applies command-line overrides, validates and
// prints the snapshot hash.
int prepare_config(const CommonOptions& o, ConfigPtr& config) {
  v2s_config* raw = nullptr;
  const v2s_status s = o.config_path.empty() ? v2s_config_default(&raw) : v2s_config_load(o.config_path.c_str(), &raw);
  if (s != V2S_OK) return report(s);
  config.reset(raw);
  if (o.resolution > 0) v2s_config_set_resolution(raw, o.resolution);
  if (o.workers >= 0) v2s_config_set_workers(raw, o.workers);
  if (o.mls_radius >= 0.0) v2s_config_set_mls_radius(raw, o.mls_radius);
  if (!o.out.empty()) {
    v2s_config_set_output_root(raw, o.out.c_str());
  } else if (std::string(v2s_config_output_root(raw)).empty()) {
    if (const char* env = std::getenv("V2S_DATA_ROOT")) v2s_config_set_output_root(raw, env);
  }
  if (const v2s_status v = v2s_config_validate(raw); v != V2S_OK) return report(v);
  char hash[32];
  v2s_config_hash(raw, hash, sizeof hash);
  std::printf("config hash: %s\n", hash);
  std::fflush(stdout);
  return kExitOk;
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "Pipeline configuration (JSON)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic volume-to-surface registration data pipeline"};
  app.require_subcommand(1);
  bool quiet = false, verbose = false;
  app.add_flag("-q,--quiet", quiet, "Only print warnings and errors");
  app.add_flag("-v,--verbose", verbose, "Print debug messages");

  CommonOptions common;
  uint64_t seed = 0;
  int count = 1;
  auto* generate = app.add_subcommand("generate", "Generate a dataset (resumable)");
  add_common(generate, common);
  generate->add_option("--seed", seed, "First seed");
  generate->add_option("--count", count, "Number of seeds to attempt")->check(CLI::NonNegativeNumber);
  generate->add_option("--res", common.resolution, "Grid resolution (8, 16, 32 or 64)");
  generate->add_option("--out", common.out, "Dataset root (default: config, then $V2S_DATA_ROOT)");
  generate->add_option("--workers", common.workers, "Worker threads (0 = all cores)");

  std::string preop, intraop, out_file, transform;
  bool prealign = false;
  auto* voxelize = app.add_subcommand("voxelize", "Voxelize a preoperative mesh and intraoperative surface");
  add_common(voxelize, common);
  voxelize->add_option("preop", preop, "Preoperative surface (.ply) or tet mesh (.tet)")->required();
  voxelize->add_option("intraop", intraop, "Intraoperative surface or point cloud (.ply)")->required();
  voxelize->add_option("output", out_file, "Output sample file")->required();
  voxelize->add_option("--res", common.resolution, "Grid resolution (8, 16, 32 or 64)");
  voxelize->add_option("--mls-radius", common.mls_radius, "MLS smoothing radius in meters (0 = off)");
  voxelize->add_option("--transform", transform, "4x4 preop-to-intraop rigid transform");
  voxelize->add_flag("--prealign", prealign, "Estimate the rigid transform by principal axes");

  std::string predictions, manifest, report_csv;
  auto* eval = app.add_subcommand("eval", "Score predicted displacement fields");
  add_common(eval, common);
  eval->add_option("predictions", predictions, "Prediction files (glob or directory)")->required();
  eval->add_option("manifest", manifest, "Dataset manifest.jsonl")->required();
  eval->add_option("output", report_csv, "Report CSV")->required();

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "Print header and statistics of a sample file");
  add_common(inspect, common);
  inspect->add_option("sample", inspect_path, "Sample file")->required();

  std::string marker_sample, marker_in, marker_out, marker_ref;
  double radius = 0.01;
  auto* markers = app.add_subcommand("markers", "Move markers by a sample's displacement grid");
  add_common(markers, common);
  markers->add_option("sample", marker_sample, "Sample or prediction file with a displacement grid")->required();
  markers->add_option("markers", marker_in, "Marker CSV (label,x,y,z)")->required();
  markers->add_option("output", marker_out, "Output marker CSV")->required();
  markers->add_option("--radius", radius, "Kernel radius in meters")->check(CLI::PositiveNumber);
  markers->add_option("--reference", marker_ref, "Reference marker CSV for error statistics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  v2s_set_log_level(verbose ? V2S_LOG_DEBUG : quiet ? V2S_LOG_WARN : V2S_LOG_INFO);

  ConfigPtr config;
  if (const int rc = prepare_config(common, config); rc != kExitOk) return rc;

  if (generate->parsed()) {
    if (std::string(v2s_config_output_root(config.get())).empty()) {
      std::fprintf(stderr, "v2s: no output root: pass --out or set V2S_DATA_ROOT\n");
      return kExitConfig;
    }
    v2s_generate_result r{};
    if (const v2s_status s = v2s_generate(config.get(), count, seed, nullptr, &r); s != V2S_OK) return report(s);
    char* summary = nullptr;
    if (v2s_generate_summary_json(v2s_config_output_root(config.get()), &summary) == V2S_OK) {
      std::printf("computed %d seeds; summary: %s\n", r.computed, summary);
      v2s_string_free(summary);
    }
    return kExitOk;
  }
  if (voxelize->parsed()) {
    v2s_voxelize_opts o{};
    o.resolution = v2s_config_resolution(config.get());
    o.mls_radius = v2s_config_mls_radius(config.get());
    o.transform_path = transform.empty() ? nullptr : transform.c_str();
    o.prealign = prealign ? 1 : 0;
    return report(v2s_voxelize(config.get(), preop.c_str(), intraop.c_str(), out_file.c_str(), &o));
  }
  if (eval->parsed()) {
    v2s_eval_result r{};
    if (const v2s_status s = v2s_eval(predictions.c_str(), manifest.c_str(), report_csv.c_str(), &r); s != V2S_OK)
      return report(s);
    std::printf("scored %d, skipped %d, missing %d\n", r.scored, r.skipped, r.missing);
    return kExitOk;
  }
  if (inspect->parsed()) {
    char* text = nullptr;
    if (const v2s_status s = v2s_inspect(inspect_path.c_str(), &text); s != V2S_OK) return report(s);
    std::fputs(text, stdout);
    v2s_string_free(text);
    return kExitOk;
  }
  if (markers->parsed()) {
    double mean = 0.0, max = 0.0;
    const v2s_status s = v2s_transfer_markers(marker_sample.c_str(), marker_in.c_str(), marker_out.c_str(), radius,
                                              marker_ref.empty() ? nullptr : marker_ref.c_str(), &mean, &max);
    if (s != V2S_OK) return report(s);
    if (!marker_ref.empty()) std::printf("marker error: mean %.6g m, max %.6g m\n", mean, max);
    return kExitOk;
  }
  return kExitError;
}
