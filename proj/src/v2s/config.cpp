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

#include "v2s/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "v2s/rng.hpp"

namespace v2s {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorCode::kConfig, message); }

// Reads optional keys of one JSON object and rejects the ones nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) config_error(where() + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& value) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      value = j_.at(key).get<T>();
    } catch (const json::exception&) {
      config_error(where(key) + " has the wrong type");
    }
  }

  template <typename T>
  void get(const char* key, Range<T>& value) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    try {
      if (!v.is_array() || v.size() != 2) throw json::type_error::create(302, "range", nullptr);
      value.min = v[0].get<T>();
      value.max = v[1].get<T>();
    } catch (const json::exception&) {
      config_error(where(key) + " must be a [min, max] pair");
    }
  }

  Reader child(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Reader(j_.contains(key) ? j_.at(key) : empty, path_.empty() ? key : path_ + "." + key);
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) config_error("unknown key " + where(item.key().c_str()));
  }

 private:
  std::string where(const char* key = nullptr) const {
    std::string s = path_.empty() ? std::string("config") : path_;
    if (key) s = path_.empty() ? std::string(key) : path_ + "." + key;
    return "'" + s + "'";
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename T>
json range(const Range<T>& r) {
  return json::array({r.min, r.max});
}

}  // namespace

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  Reader root(j, "");
  {
    Reader g = root.child("gen");
    g.get("num_blobs", c.gen.num_blobs);
    g.get("blob_radius", c.gen.blob_radius);
    g.get("target_edge_length", c.gen.target_edge_length);
    g.get("smoothing_iterations", c.gen.smoothing_iterations);
    g.get("bbox_diagonal", c.gen.bbox_diagonal);
    g.get("subtract_probability", c.gen.subtract_probability);
    g.get("max_retries", c.gen.max_retries);
    g.finish();
  }
  {
    Reader t = root.child("tet");
    t.get("target_edge", c.tet_target_edge);
    t.get("quality_floor", c.tet.quality_floor);
    t.get("max_repair_rounds", c.tet.max_repair_rounds);
    t.get("volume_tolerance", c.tet.volume_tolerance);
    t.finish();
  }
  {
    Reader s = root.child("solver");
    s.get("tolerance", c.solver.tolerance);
    s.get("max_newton_steps", c.solver.max_newton_steps);
    s.get("load_steps", c.solver.load_steps);
    s.get("max_step_halvings", c.solver.max_step_halvings);
    s.finish();
  }
  {
    Reader s = root.child("scenario");
    s.get("load_patch_count", c.scenario.load_patch_count);
    s.get("max_force", c.scenario.max_force);
    s.get("youngs_modulus", c.scenario.youngs_modulus);
    s.get("poissons_ratio", c.scenario.poissons_ratio);
    s.get("load_patch_fraction", c.scenario.load_patch_fraction);
    s.get("fixed_patch_fraction", c.scenario.fixed_patch_fraction);
    s.get("max_retries", c.scenario.max_retries);
    s.finish();
  }
  {
    Reader p = root.child("partial");
    p.get("visible_fraction", c.partial.visible_fraction);
    p.get("resample_spacing", c.partial.resample_spacing);
    p.get("vertex_jitter", c.partial.vertex_jitter);
    p.get("dropout_fraction", c.partial.dropout_fraction);
    p.get("hole_count", c.partial.hole_count);
    p.get("hole_radius", c.partial.hole_radius);
    p.get("max_subdivision_levels", c.partial.max_subdivision_levels);
    p.finish();
  }
  {
    Reader a = root.child("acceptance");
    a.get("max_displacement", c.acceptance.max_displacement);
    a.get("min_visible_fraction", c.acceptance.min_visible_fraction);
    a.finish();
  }
  {
    Reader g = root.child("grid");
    g.get("resolution", c.grid_resolution);
    g.get("padding", c.grid_padding);
    g.get("kernel_sigma", c.kernel.sigma_voxels);
    g.get("kernel_truncation", c.kernel.truncation);
    g.finish();
  }
  {
    Reader s = root.child("split");
    s.get("val_fraction", c.val_fraction);
    s.finish();
  }
  {
    Reader e = root.child("eval");
    e.get("marker_radius", c.marker_radius);
    e.get("mls_radius", c.mls_radius);
    e.finish();
  }
  root.get("keep_meshes", c.keep_meshes);
  root.get("workers", c.workers);
  root.get("output_root", c.output_root);
  root.finish();
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    config_error(path + ": " + e.what());
  }
  return config_from_json(j);
}

void PipelineConfig::validate() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) config_error(what);
  };
  try {
    gen.validate();
    scenario.validate();
    PartialSurfaceParams p = partial;
    p.validate();
    kernel.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  check(tet_target_edge > 0.0, "tet.target_edge must be positive");
  check(tet.quality_floor > 0.0 && tet.quality_floor < 1.0, "tet.quality_floor must lie in (0, 1)");
  check(tet.max_repair_rounds >= 0, "tet.max_repair_rounds must be nonnegative");
  check(tet.volume_tolerance > 0.0, "tet.volume_tolerance must be positive");
  check(solver.tolerance > 0.0, "solver.tolerance must be positive");
  check(solver.max_newton_steps >= 1, "solver.max_newton_steps must be at least 1");
  check(solver.load_steps >= 1, "solver.load_steps must be at least 1");
  check(solver.max_step_halvings >= 0, "solver.max_step_halvings must be nonnegative");
  check(acceptance.max_displacement > 0.0, "acceptance.max_displacement must be positive");
  check(acceptance.min_visible_fraction >= 0.0 && acceptance.min_visible_fraction <= 1.0,
        "acceptance.min_visible_fraction must lie in [0, 1]");
  check(grid_resolution == 8 || grid_resolution == 16 || grid_resolution == 32 || grid_resolution == 64,
        "grid.resolution must be one of 8, 16, 32, 64");
  check(grid_padding >= 0.0, "grid.padding must be nonnegative");
  check(val_fraction >= 0.0 && val_fraction <= 1.0, "split.val_fraction must lie in [0, 1]");
  check(marker_radius > 0.0, "eval.marker_radius must be positive");
  check(mls_radius >= 0.0, "eval.mls_radius must be nonnegative");
  check(workers >= 0, "workers must be nonnegative");
}

json config_snapshot(const PipelineConfig& c) {
  return {
      {"gen",
       {{"num_blobs", range(c.gen.num_blobs)},
        {"blob_radius", range(c.gen.blob_radius)},
        {"target_edge_length", c.gen.target_edge_length},
        {"smoothing_iterations", c.gen.smoothing_iterations},
        {"bbox_diagonal", range(c.gen.bbox_diagonal)},
        {"subtract_probability", c.gen.subtract_probability},
        {"max_retries", c.gen.max_retries}}},
      {"tet",
       {{"target_edge", c.tet_target_edge},
        {"quality_floor", c.tet.quality_floor},
        {"max_repair_rounds", c.tet.max_repair_rounds},
        {"volume_tolerance", c.tet.volume_tolerance}}},
      {"solver",
       {{"tolerance", c.solver.tolerance},
        {"max_newton_steps", c.solver.max_newton_steps},
        {"load_steps", c.solver.load_steps},
        {"max_step_halvings", c.solver.max_step_halvings}}},
      {"scenario",
       {{"load_patch_count", range(c.scenario.load_patch_count)},
        {"max_force", c.scenario.max_force},
        {"youngs_modulus", range(c.scenario.youngs_modulus)},
        {"poissons_ratio", c.scenario.poissons_ratio},
        {"load_patch_fraction", range(c.scenario.load_patch_fraction)},
        {"fixed_patch_fraction", range(c.scenario.fixed_patch_fraction)},
        {"max_retries", c.scenario.max_retries}}},
      {"partial",
       {{"visible_fraction", range(c.partial.visible_fraction)},
        {"resample_spacing", c.partial.resample_spacing},
        {"vertex_jitter", c.partial.vertex_jitter},
        {"dropout_fraction", c.partial.dropout_fraction},
        {"hole_count", range(c.partial.hole_count)},
        {"hole_radius", range(c.partial.hole_radius)},
        {"max_subdivision_levels", c.partial.max_subdivision_levels}}},
      {"acceptance",
       {{"max_displacement", c.acceptance.max_displacement},
        {"min_visible_fraction", c.acceptance.min_visible_fraction}}},
      {"grid",
       {{"resolution", c.grid_resolution},
        {"padding", c.grid_padding},
        {"kernel_sigma", c.kernel.sigma_voxels},
        {"kernel_truncation", c.kernel.truncation}}},
      {"split", {{"val_fraction", c.val_fraction}}},
      {"eval", {{"marker_radius", c.marker_radius}, {"mls_radius", c.mls_radius}}},
      {"keep_meshes", c.keep_meshes},
  };
}

json config_to_json(const PipelineConfig& c) {
  json j = config_snapshot(c);
  j["workers"] = c.workers;
  j["output_root"] = c.output_root;
  return j;
}

std::string config_hash(const PipelineConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config_snapshot(c).dump())));
  return buf;
}

}  // namespace v2s
