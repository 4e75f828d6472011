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

#include "v2s/pipeline.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "v2s/log.hpp"
#include "v2s/mesh_io.hpp"
#include "v2s/point_cloud.hpp"

namespace v2s {

namespace fs = std::filesystem;

SimulatedCase simulate_case(const PipelineConfig& config, uint64_t seed) {
  SimulatedCase c;
  c.meta.seed = seed;
  auto fail = [&](const char* stage, const Error& e) {
    c.meta.upstream_failure = stage;
    log_debug("seed " + std::to_string(seed) + ": " + stage + " failed: " + e.what());
    const AcceptDecision d = accept_sample(c.meta, config.acceptance);
    c.meta.accepted = d.accepted;
    c.meta.reason = d.reason;
  };

  try {
    GenParams gen = config.gen;
    gen.seed = seed;
    c.organ = gen_random_organ(gen);
  } catch (const Error& e) {
    fail("generation", e);
    return c;
  }
  try {
    c.preop = tetrahedralize(c.organ, config.tet_target_edge, config.tet);
  } catch (const Error& e) {
    fail("meshing", e);
    return c;
  }
  try {
    c.scenario = sample_scenario(seed, c.preop, config.scenario);
  } catch (const Error& e) {
    fail("scenario", e);
    return c;
  }
  c.meta.material = c.scenario.material;
  try {
    c.u = solve_static(c.preop, c.scenario, config.solver);
  } catch (const Error& e) {
    fail("solver", e);
    return c;
  }

  double sum = 0.0, peak = 0.0;
  for (const Vec3& d : c.u) {
    sum += d.norm();
    peak = std::max(peak, d.norm());
  }
  c.meta.mean_displacement = c.u.empty() ? 0.0 : sum / static_cast<double>(c.u.size());
  c.meta.max_displacement = peak;

  std::vector<Vec3> deformed(c.preop.vertex_count());
  for (size_t i = 0; i < deformed.size(); ++i) deformed[i] = c.preop.vertices()[i] + c.u[i];
  try {
    PartialSurfaceParams partial = config.partial;
    partial.seed = seed;
    c.intraop = extract_partial_surface(c.preop.boundary_surface(deformed), partial);
  } catch (const Error& e) {
    fail("scenario", e);
    return c;
  }
  c.meta.visible_fraction = c.intraop.visible_fraction;

  const AcceptDecision decision = accept_sample(c.meta, config.acceptance);
  c.meta.accepted = decision.accepted;
  c.meta.reason = decision.reason;
  if (!decision.accepted) return c;

  const SurfaceMesh boundary = c.preop.boundary_surface();
  const GridSpec spec = grid_spec_for(boundary, c.intraop.surface, config.grid_resolution, config.grid_padding);
  c.sample = voxelize(c.preop, c.u, c.intraop.surface, spec, config.kernel);
  c.sample->meta = c.meta;
  return c;
}

std::string sample_file_name(uint64_t seed) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "sample_%012llu.v2sd", static_cast<unsigned long long>(seed));
  return buf;
}

namespace {

std::string stem_of(const std::string& file_name) {
  const std::string suffix = ".v2sd";
  if (file_name.size() > suffix.size() && file_name.ends_with(suffix))
    return file_name.substr(0, file_name.size() - suffix.size());
  return fs::path(file_name).stem().string();
}

void write_case_meshes(const SimulatedCase& c, const fs::path& dir) {
  const std::string base = (dir / stem_of(sample_file_name(c.meta.seed))).string();
  write_tetmesh(c.preop, base + "_preop.tet");
  write_ply(c.preop.boundary_surface(), base + "_preop.ply");
  write_ply(c.intraop.surface, base + "_intraop.ply");
}

}  // namespace

GenerateSummary cmd_generate(const PipelineConfig& config, int count, uint64_t seed0, const std::string& root) {
  config.validate();
  if (count < 0) throw Error(ErrorCode::kInvalidArgument, "count must be nonnegative");
  const fs::path root_dir(root);
  const fs::path samples_dir = root_dir / "samples";
  const fs::path meshes_dir = root_dir / "meshes";
  std::error_code ec;
  fs::create_directories(samples_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + samples_dir.string() + ": " + ec.message());
  if (config.keep_meshes) fs::create_directories(meshes_dir);

  Manifest manifest;
  manifest.config = config_snapshot(config);
  manifest.config_hash = config_hash(config);
  const std::string manifest_path = (root_dir / "manifest.jsonl").string();

  std::map<uint64_t, ManifestRecord> records;
  if (fs::exists(manifest_path)) {
    const Manifest existing = read_manifest(manifest_path);
    if (existing.config_hash != manifest.config_hash)
      throw Error(ErrorCode::kInvalidArgument, "dataset at " + root + " was generated with config " +
                                                   existing.config_hash + ", not " + manifest.config_hash);
    for (const ManifestRecord& r : existing.records) records[r.seed] = r;
  }

  std::vector<uint64_t> todo;
  for (int i = 0; i < count; ++i) {
    const uint64_t seed = seed0 + static_cast<uint64_t>(i);
    const auto it = records.find(seed);
    if (it != records.end()) {
      if (!it->second.accepted) continue;
      const fs::path file = root_dir / it->second.path;
      if (fs::exists(file) && fs::exists(file.string() + ".json")) continue;
    }
    todo.push_back(seed);
  }

  // Appends make an interrupted run resumable; the final rewrite sorts.
  if (!fs::exists(manifest_path)) write_manifest(manifest, manifest_path);
  ManifestAppender appender(manifest_path, manifest);

  unsigned workers = config.workers > 0 ? static_cast<unsigned>(config.workers) : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(todo.size())));
  std::vector<ManifestRecord> fresh(todo.size());
  std::atomic<size_t> next{0};
  std::exception_ptr hard_error;
  std::mutex error_mutex;

  auto work = [&] {
    for (size_t i = next++; i < todo.size(); i = next++) {
      try {
        const uint64_t seed = todo[i];
        const auto t0 = std::chrono::steady_clock::now();
        SimulatedCase c = simulate_case(config, seed);
        ManifestRecord r;
        r.seed = seed;
        r.meta = c.meta;
        r.accepted = c.meta.accepted;
        r.reason = c.meta.reason;
        if (r.accepted) {
          r.path = "samples/" + sample_file_name(seed);
          r.split = assign_split(seed, config.val_fraction);
          write_sample(*c.sample, (root_dir / r.path).string());
          if (config.keep_meshes) write_case_meshes(c, meshes_dir);
        }
        appender.append(r);
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        log_info("seed " + std::to_string(seed) + (r.accepted ? " accepted" : " discarded (" + r.reason + ")") +
                 " in " + std::to_string(static_cast<long>(ms)) + " ms");
        fresh[i] = std::move(r);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!hard_error) hard_error = std::current_exception();
        next = todo.size();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (hard_error) std::rethrow_exception(hard_error);

  for (ManifestRecord& r : fresh) records[r.seed] = std::move(r);
  manifest.records.clear();
  for (auto& [seed, r] : records) manifest.records.push_back(r);
  write_manifest(manifest, manifest_path);

  GenerateSummary summary;
  summary.attempted = static_cast<int>(manifest.records.size());
  summary.accepted = manifest.accepted_count();
  summary.discarded = manifest.discard_counts();
  summary.computed = todo;
  summary.manifest_path = manifest_path;
  return summary;
}

namespace {

bool has_extension(const std::string& path, const char* ext) {
  std::string e = fs::path(path).extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return e == ext;
}

}  // namespace

Sample cmd_voxelize(const PipelineConfig& config, const std::string& preop_path, const std::string& intraop_path,
                    const std::string& out_path, const VoxelizeOptions& options) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  SurfaceMesh preop;
  if (has_extension(preop_path, ".tet")) {
    preop = read_tetmesh(preop_path).boundary_surface();
  } else {
    preop = read_ply(preop_path);
    if (preop.triangles.empty() || !is_closed(preop))
      throw Error(ErrorCode::kOpenSurface, preop_path + " is not a closed surface");
  }
  SurfaceMesh intraop = read_ply(intraop_path);
  if (intraop.empty()) throw Error(ErrorCode::kInvalidArgument, intraop_path + " holds no points");
  if (options.mls_radius > 0.0) intraop = mls_smooth(intraop, options.mls_radius);

  std::optional<RigidTransform> transform = options.transform;
  if (!transform && options.prealign) transform = rigid_prealign(preop, intraop);
  if (transform) {
    const RigidTransform back = transform->inverse();
    for (Vec3& p : intraop.vertices) p = back.apply(p);
  }

  const GridSpec spec = grid_spec_for(preop, intraop, options.resolution, config.grid_padding);
  Sample s = voxelize(preop, intraop, spec);
  write_sample(s, out_path);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  log_info("voxelized " + out_path + " in " + std::to_string(static_cast<long>(ms)) + " ms");
  return s;
}

namespace {

std::vector<std::string> glob_files(const std::string& pattern) {
  fs::path p(pattern);
  std::vector<std::string> out;
  if (fs::is_directory(p)) {
    for (const auto& e : fs::directory_iterator(p))
      if (e.is_regular_file() && e.path().extension() == ".v2sd") out.push_back(e.path().string());
  } else {
    const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    const std::string name = p.filename().string();
    if (fs::is_directory(dir))
      for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && fnmatch(name.c_str(), e.path().filename().c_str(), 0) == 0)
          out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

EvalSummary cmd_eval(const std::string& pred_glob, const std::string& manifest_path, const std::string& out_csv) {
  const Manifest manifest = read_manifest(manifest_path);
  const fs::path root = fs::path(manifest_path).parent_path();
  std::map<std::string, const ManifestRecord*> by_stem;
  for (const ManifestRecord& r : manifest.records)
    if (r.accepted) by_stem[stem_of(fs::path(r.path).filename().string())] = &r;

  EvalSummary summary;
  std::set<std::string> scored;
  for (const std::string& file : glob_files(pred_glob)) {
    std::string stem = stem_of(fs::path(file).filename().string());
    if (!by_stem.count(stem) && stem.ends_with("_pred")) stem.resize(stem.size() - 5);
    const auto it = by_stem.find(stem);
    if (it == by_stem.end()) {
      log_warn("no dataset sample matches prediction " + file + ", skipped");
      ++summary.skipped;
      continue;
    }
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const Sample pred = read_sample(file);
      if (pred.u.empty()) throw Error(ErrorCode::kFormat, file + " holds no displacement grid");
      const Sample gt = read_sample((root / it->second->path).string());
      ErrorStats s = displacement_error(pred.u, gt.u, gt.sdf_p);
      s.sample_id = stem;
      s.visible_fraction = it->second->meta.visible_fraction;
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      log_info("scored " + stem + " in " + std::to_string(ms) + " ms");
      summary.stats.push_back(s);
      scored.insert(stem);
    } catch (const Error& e) {
      log_warn(std::string("skipping ") + file + ": " + e.what());
      ++summary.skipped;
    }
  }
  for (const auto& [stem, r] : by_stem)
    if (!scored.count(stem)) {
      log_warn("no prediction for " + stem);
      ++summary.missing;
    }
  export_report(summary.stats, out_csv);
  return summary;
}

std::string cmd_inspect(const std::string& path) {
  const Sample s = read_sample(path);
  const GridSpec& spec = s.spec();
  std::ostringstream os;
  os.precision(9);
  os << "file: " << path << "\n"
     << "format: V2SD version " << kSampleFormatVersion << "\n"
     << "channel_set: " << static_cast<int>(channel_set_of(s)) << "\n"
     << "resolution: " << spec.resolution << "\n"
     << "spacing: " << spec.spacing << "\n"
     << "origin: " << spec.origin.x() << " " << spec.origin.y() << " " << spec.origin.z() << "\n";
  auto stats = [&](const char* name, const GridField& f) {
    if (f.empty()) return;
    const size_t n = spec.point_count();
    for (int c = 0; c < f.channels(); ++c) {
      double lo = INFINITY, hi = -INFINITY, sum = 0.0;
      for (size_t i = 0; i < n; ++i) {
        const double v = f.values()[c * n + i];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
      }
      os << name;
      if (f.channels() > 1) os << "[" << "xyz"[c] << "]";
      os << ": min " << lo << " max " << hi << " mean " << sum / static_cast<double>(n) << "\n";
    }
  };
  stats("sdf_p", s.sdf_p);
  stats("df_i", s.df_i);
  stats("u", s.u);
  if (!s.sdf_p.empty()) {
    const auto interior = std::count_if(s.sdf_p.values().begin(), s.sdf_p.values().end(), [](float v) { return v < 0.0f; });
    os << "interior_points: " << interior << "\n";
  }
  os << "meta: " << meta_to_json(s.meta).dump() << "\n";
  return os.str();
}

}  // namespace v2s
