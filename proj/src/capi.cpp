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

#include "v2s/v2s.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include "v2s/config.hpp"
#include "v2s/log.hpp"
#include "v2s/mesh_io.hpp"
#include "v2s/pipeline.hpp"

struct v2s_surface {
  v2s::SurfaceMesh mesh;
};
struct v2s_tetmesh {
  v2s::TetMesh mesh;
};
struct v2s_scenario {
  v2s::Scenario scenario;
};
struct v2s_sample {
  v2s::Sample sample;
};
struct v2s_config {
  v2s::PipelineConfig config;
  std::string root_storage;
};

namespace {

thread_local std::string g_last_error;

v2s_status fail(v2s_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
v2s_status guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return V2S_OK;
  } catch (const v2s::Error& e) {
    return fail(static_cast<v2s_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(V2S_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(V2S_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(V2S_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw v2s::Error(v2s::ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

std::vector<v2s::Vec3> unpack(const double* xyz, size_t n) {
  std::vector<v2s::Vec3> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = v2s::Vec3(xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]);
  return out;
}

void pack(const std::vector<v2s::Vec3>& v, double* out) {
  for (size_t i = 0; i < v.size(); ++i)
    for (int k = 0; k < 3; ++k) out[3 * i + k] = v[i][k];
}

std::vector<int> indices(const int32_t* ids, size_t n) { return std::vector<int>(ids, ids + n); }

v2s::SolverOpts solver_opts(const v2s_solver_opts* opts) {
  v2s::SolverOpts o;
  if (opts) {
    o.tolerance = opts->tolerance;
    o.max_newton_steps = opts->max_newton_steps;
    o.load_steps = opts->load_steps;
    o.max_step_halvings = opts->max_step_halvings;
  }
  return o;
}

const v2s::GridField& grid_of(const v2s::Sample& s, v2s_grid grid) {
  switch (grid) {
    case V2S_GRID_SDF: return s.sdf_p;
    case V2S_GRID_DF: return s.df_i;
    case V2S_GRID_U: return s.u;
  }
  throw v2s::Error(v2s::ErrorCode::kInvalidArgument, "unknown grid");
}

}  // namespace

extern "C" {

const char* v2s_version(void) { return "1.0.0"; }

const char* v2s_last_error(void) { return g_last_error.c_str(); }

const char* v2s_status_name(v2s_status status) {
  if (status == V2S_OK) return "ok";
  if (status == V2S_ERR_INTERNAL) return "internal";
  if (status >= 1 && status <= 18) return v2s::error_code_name(static_cast<v2s::ErrorCode>(status)).data();
  return "unknown";
}

void v2s_set_log_level(v2s_log_level level) { v2s::set_log_level(static_cast<v2s::LogLevel>(level)); }

void v2s_string_free(char* str) { std::free(str); }

void v2s_gen_params_default(v2s_gen_params* p) {
  if (!p) return;
  const v2s::GenParams d;
  *p = {d.seed,
        d.num_blobs.min,
        d.num_blobs.max,
        d.blob_radius.min,
        d.blob_radius.max,
        d.target_edge_length,
        d.smoothing_iterations,
        d.bbox_diagonal.min,
        d.bbox_diagonal.max,
        d.subtract_probability,
        d.max_retries};
}

v2s_status v2s_surface_create(const double* vertices, size_t vertex_count, const int32_t* triangles,
                              size_t triangle_count, v2s_surface** out) {
  return guard([&] {
    require(out && (vertices || !vertex_count) && (triangles || !triangle_count), "null argument");
    auto s = std::make_unique<v2s_surface>();
    s->mesh.vertices = unpack(vertices, vertex_count);
    s->mesh.triangles.resize(triangle_count);
    for (size_t t = 0; t < triangle_count; ++t)
      s->mesh.triangles[t] = {triangles[3 * t], triangles[3 * t + 1], triangles[3 * t + 2]};
    v2s::validate_indices(s->mesh);
    *out = s.release();
  });
}

v2s_status v2s_surface_generate(const v2s_gen_params* p, v2s_surface** out) {
  return guard([&] {
    require(p && out, "null argument");
    v2s::GenParams g;
    g.seed = p->seed;
    g.num_blobs = {p->num_blobs_min, p->num_blobs_max};
    g.blob_radius = {p->blob_radius_min, p->blob_radius_max};
    g.target_edge_length = p->target_edge_length;
    g.smoothing_iterations = p->smoothing_iterations;
    g.bbox_diagonal = {p->bbox_diagonal_min, p->bbox_diagonal_max};
    g.subtract_probability = p->subtract_probability;
    g.max_retries = p->max_retries;
    *out = new v2s_surface{v2s::gen_random_organ(g)};
  });
}

v2s_status v2s_surface_load(const char* path, v2s_surface** out) {
  return guard([&] {
    require(path && out, "null argument");
    *out = new v2s_surface{v2s::read_ply(path)};
  });
}

v2s_status v2s_surface_save(const v2s_surface* s, const char* path) {
  return guard([&] {
    require(s && path, "null argument");
    v2s::write_ply(s->mesh, path);
  });
}

void v2s_surface_free(v2s_surface* s) { delete s; }

size_t v2s_surface_vertex_count(const v2s_surface* s) { return s ? s->mesh.vertices.size() : 0; }

size_t v2s_surface_triangle_count(const v2s_surface* s) { return s ? s->mesh.triangles.size() : 0; }

v2s_status v2s_surface_vertices(const v2s_surface* s, double* out) {
  return guard([&] {
    require(s && out, "null argument");
    pack(s->mesh.vertices, out);
  });
}

v2s_status v2s_surface_triangles(const v2s_surface* s, int32_t* out) {
  return guard([&] {
    require(s && out, "null argument");
    for (size_t t = 0; t < s->mesh.triangles.size(); ++t)
      for (int k = 0; k < 3; ++k) out[3 * t + k] = s->mesh.triangles[t][k];
  });
}

v2s_status v2s_surface_is_closed(const v2s_surface* s, int* closed) {
  return guard([&] {
    require(s && closed, "null argument");
    *closed = !s->mesh.triangles.empty() && v2s::is_closed(s->mesh);
  });
}

v2s_status v2s_surface_classify_inside(const v2s_surface* s, const double* points, size_t count, uint8_t* inside) {
  return guard([&] {
    require(s && (points || !count) && (inside || !count), "null argument");
    const auto pts = unpack(points, count);
    const auto in = v2s::classify_inside(pts, s->mesh);
    for (size_t i = 0; i < count; ++i) inside[i] = in[i] ? 1 : 0;
  });
}

v2s_status v2s_tetmesh_create(const double* vertices, size_t vertex_count, const int32_t* tets, size_t tet_count,
                              v2s_tetmesh** out) {
  return guard([&] {
    require(out && (vertices || !vertex_count) && (tets || !tet_count), "null argument");
    std::vector<v2s::Tet> t(tet_count);
    for (size_t i = 0; i < tet_count; ++i) t[i] = {tets[4 * i], tets[4 * i + 1], tets[4 * i + 2], tets[4 * i + 3]};
    *out = new v2s_tetmesh{v2s::TetMesh(unpack(vertices, vertex_count), std::move(t))};
  });
}

v2s_status v2s_tetrahedralize(const v2s_surface* s, double target_edge, double quality_floor, v2s_tetmesh** out) {
  return guard([&] {
    require(s && out, "null argument");
    v2s::TetrahedralizeOptions o;
    o.quality_floor = quality_floor;
    *out = new v2s_tetmesh{v2s::tetrahedralize(s->mesh, target_edge, o)};
  });
}

v2s_status v2s_tetmesh_load(const char* path, v2s_tetmesh** out) {
  return guard([&] {
    require(path && out, "null argument");
    *out = new v2s_tetmesh{v2s::read_tetmesh(path)};
  });
}

v2s_status v2s_tetmesh_save(const v2s_tetmesh* m, const char* path) {
  return guard([&] {
    require(m && path, "null argument");
    v2s::write_tetmesh(m->mesh, path);
  });
}

void v2s_tetmesh_free(v2s_tetmesh* m) { delete m; }

size_t v2s_tetmesh_vertex_count(const v2s_tetmesh* m) { return m ? m->mesh.vertex_count() : 0; }

size_t v2s_tetmesh_tet_count(const v2s_tetmesh* m) { return m ? m->mesh.tet_count() : 0; }

v2s_status v2s_tetmesh_vertices(const v2s_tetmesh* m, double* out) {
  return guard([&] {
    require(m && out, "null argument");
    pack(m->mesh.vertices(), out);
  });
}

v2s_status v2s_tetmesh_tets(const v2s_tetmesh* m, int32_t* out) {
  return guard([&] {
    require(m && out, "null argument");
    for (size_t t = 0; t < m->mesh.tet_count(); ++t)
      for (int k = 0; k < 4; ++k) out[4 * t + k] = m->mesh.tets()[t][k];
  });
}

v2s_status v2s_tetmesh_volume(const v2s_tetmesh* m, double* volume) {
  return guard([&] {
    require(m && volume, "null argument");
    *volume = v2s::total_volume(m->mesh);
  });
}

v2s_status v2s_tetmesh_boundary(const v2s_tetmesh* m, v2s_surface** out) {
  return guard([&] {
    require(m && out, "null argument");
    *out = new v2s_surface{m->mesh.boundary_surface()};
  });
}

v2s_status v2s_lame_from_elastic(double E, double nu, double* mu, double* lambda) {
  return guard([&] {
    require(mu && lambda, "null argument");
    const v2s::LamePair l = v2s::lame_from_elastic(E, nu);
    *mu = l.mu;
    *lambda = l.lambda;
  });
}

v2s_status v2s_strain_energy_density(const double* F, double E, double nu, double* energy) {
  return guard([&] {
    require(F && energy, "null argument");
    v2s::Mat3 m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = F[3 * i + j];
    *energy = v2s::strain_energy_density(m, v2s::MaterialParams::from_elastic(E, nu));
  });
}

v2s_status v2s_scenario_create(double E, double nu, v2s_scenario** out) {
  return guard([&] {
    require(out, "null argument");
    auto s = std::make_unique<v2s_scenario>();
    s->scenario.material = v2s::MaterialParams::from_elastic(E, nu);
    *out = s.release();
  });
}

v2s_status v2s_scenario_sample(uint64_t seed, const v2s_tetmesh* mesh, v2s_scenario** out) {
  return guard([&] {
    require(mesh && out, "null argument");
    *out = new v2s_scenario{v2s::sample_scenario(seed, mesh->mesh)};
  });
}

void v2s_scenario_free(v2s_scenario* s) { delete s; }

v2s_status v2s_scenario_fix_vertices(v2s_scenario* s, const int32_t* vertices, size_t count) {
  return guard([&] {
    require(s && (vertices || !count), "null argument");
    auto& fixed = s->scenario.fixed_vertices;
    fixed.insert(fixed.end(), vertices, vertices + count);
  });
}

v2s_status v2s_scenario_constrain_axis(v2s_scenario* s, const int32_t* vertices, size_t count, int axis) {
  return guard([&] {
    require(s && (vertices || !count), "null argument");
    require(axis >= 0 && axis <= 2, "axis must be 0, 1 or 2");
    for (size_t i = 0; i < count; ++i) s->scenario.sliding.push_back({vertices[i], axis});
  });
}

v2s_status v2s_scenario_add_load(v2s_scenario* s, const int32_t* vertices, size_t count, const double* force) {
  return guard([&] {
    require(s && vertices && count && force, "load patch needs vertices and a force");
    s->scenario.loads.push_back({indices(vertices, count), v2s::Vec3(force[0], force[1], force[2])});
  });
}

size_t v2s_scenario_fixed_count(const v2s_scenario* s) { return s ? s->scenario.fixed_vertices.size() : 0; }

size_t v2s_scenario_load_count(const v2s_scenario* s) { return s ? s->scenario.loads.size() : 0; }

v2s_status v2s_scenario_load(const v2s_scenario* s, size_t index, double* force, size_t* vertex_count) {
  return guard([&] {
    require(s, "null argument");
    require(index < s->scenario.loads.size(), "load index out of range");
    const v2s::LoadPatch& p = s->scenario.loads[index];
    if (force)
      for (int k = 0; k < 3; ++k) force[k] = p.force[k];
    if (vertex_count) *vertex_count = p.vertices.size();
  });
}

v2s_status v2s_scenario_material(const v2s_scenario* s, double* E, double* nu) {
  return guard([&] {
    require(s, "null argument");
    if (E) *E = s->scenario.material.youngs_modulus;
    if (nu) *nu = s->scenario.material.poissons_ratio;
  });
}

void v2s_solver_opts_default(v2s_solver_opts* opts) {
  if (!opts) return;
  const v2s::SolverOpts d;
  *opts = {d.tolerance, d.max_newton_steps, d.load_steps, d.max_step_halvings};
}

v2s_status v2s_solve_static(const v2s_tetmesh* mesh, const v2s_scenario* s, const v2s_solver_opts* opts,
                            double* displacement) {
  return guard([&] {
    require(mesh && s && displacement, "null argument");
    pack(v2s::solve_static(mesh->mesh, s->scenario, solver_opts(opts)), displacement);
  });
}

v2s_status v2s_residual(const v2s_tetmesh* mesh, const double* displacement, const v2s_scenario* s,
                        double* residual) {
  return guard([&] {
    require(mesh && displacement && s && residual, "null argument");
    const auto u = unpack(displacement, mesh->mesh.vertex_count());
    pack(v2s::assemble_residual(mesh->mesh, u, s->scenario), residual);
  });
}

v2s_status v2s_sample_read(const char* path, v2s_sample** out) {
  return guard([&] {
    require(path && out, "null argument");
    *out = new v2s_sample{v2s::read_sample(path)};
  });
}

v2s_status v2s_sample_write(const v2s_sample* s, const char* path) {
  return guard([&] {
    require(s && path, "null argument");
    v2s::write_sample(s->sample, path);
  });
}

void v2s_sample_free(v2s_sample* s) { delete s; }

int v2s_sample_channel_set(const v2s_sample* s) {
  if (!s) return 0;
  try {
    return static_cast<int>(v2s::channel_set_of(s->sample));
  } catch (const v2s::Error&) {
    return 0;
  }
}

v2s_status v2s_sample_geometry(const v2s_sample* s, int* resolution, double* spacing, double* origin) {
  return guard([&] {
    require(s, "null argument");
    const v2s::GridSpec& spec = s->sample.spec();
    if (resolution) *resolution = spec.resolution;
    if (spacing) *spacing = spec.spacing;
    if (origin)
      for (int k = 0; k < 3; ++k) origin[k] = spec.origin[k];
  });
}

v2s_status v2s_sample_grid(const v2s_sample* s, v2s_grid grid, float* out, size_t capacity, size_t* count) {
  return guard([&] {
    require(s, "null argument");
    const v2s::GridField& f = grid_of(s->sample, grid);
    if (count) *count = f.values().size();
    if (!out) return;
    require(capacity >= f.values().size(), "output buffer too small");
    std::copy(f.values().begin(), f.values().end(), out);
  });
}

v2s_status v2s_sample_set_displacement(v2s_sample* s, const float* values, size_t count) {
  return guard([&] {
    require(s && values, "null argument");
    v2s::GridField u(s->sample.spec(), 3);
    if (count != u.values().size()) throw v2s::Error(v2s::ErrorCode::kLengthMismatch, "displacement size mismatch");
    std::copy(values, values + count, u.values().begin());
    s->sample.u = std::move(u);
  });
}

v2s_status v2s_sample_flip(const v2s_sample* s, int axes, v2s_sample** out) {
  return guard([&] {
    require(s && out, "null argument");
    *out = new v2s_sample{v2s::flip_augment(s->sample, axes)};
  });
}

v2s_status v2s_sample_downsample(const v2s_sample* s, int resolution, v2s_sample** out) {
  return guard([&] {
    require(s && out, "null argument");
    auto r = std::make_unique<v2s_sample>();
    r->sample.meta = s->sample.meta;
    if (!s->sample.sdf_p.empty()) r->sample.sdf_p = v2s::downsample(s->sample.sdf_p, resolution);
    if (!s->sample.df_i.empty()) r->sample.df_i = v2s::downsample(s->sample.df_i, resolution);
    if (!s->sample.u.empty()) r->sample.u = v2s::downsample(s->sample.u, resolution);
    *out = r.release();
  });
}

v2s_status v2s_sample_meta_json(const v2s_sample* s, char** out) {
  return guard([&] {
    require(s && out, "null argument");
    *out = dup_string(v2s::meta_to_json(s->sample.meta).dump());
  });
}

v2s_status v2s_displacement_error(const v2s_sample* prediction, const v2s_sample* truth, v2s_error_stats* stats) {
  return guard([&] {
    require(prediction && truth && stats, "null argument");
    const v2s::ErrorStats e = v2s::displacement_error(prediction->sample.u, truth->sample.u, truth->sample.sdf_p);
    *stats = {e.count, e.mean_error, e.max_error, e.p50_error, e.p90_error, e.p95_error, e.mean_target_displacement};
  });
}

v2s_status v2s_config_default(v2s_config** out) {
  return guard([&] {
    require(out, "null argument");
    *out = new v2s_config{};
  });
}

v2s_status v2s_config_load(const char* path, v2s_config** out) {
  return guard([&] {
    require(path && out, "null argument");
    *out = new v2s_config{v2s::load_config(path), {}};
  });
}

v2s_status v2s_config_parse(const char* text, v2s_config** out) {
  return guard([&] {
    require(text && out, "null argument");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw v2s::Error(v2s::ErrorCode::kConfig, e.what());
    }
    v2s::PipelineConfig config = v2s::config_from_json(j);
    config.validate();
    *out = new v2s_config{std::move(config), {}};
  });
}

void v2s_config_free(v2s_config* c) { delete c; }

v2s_status v2s_config_validate(const v2s_config* c) {
  return guard([&] {
    require(c, "null argument");
    c->config.validate();
  });
}

v2s_status v2s_config_hash(const v2s_config* c, char* out, size_t capacity) {
  return guard([&] {
    require(c && out, "null argument");
    const std::string h = v2s::config_hash(c->config);
    require(capacity > h.size(), "output buffer too small");
    std::memcpy(out, h.c_str(), h.size() + 1);
  });
}

v2s_status v2s_config_json(const v2s_config* c, char** out) {
  return guard([&] {
    require(c && out, "null argument");
    *out = dup_string(v2s::config_to_json(c->config).dump(2));
  });
}

const char* v2s_config_output_root(const v2s_config* c) { return c ? c->config.output_root.c_str() : ""; }

v2s_status v2s_config_set_output_root(v2s_config* c, const char* root) {
  return guard([&] {
    require(c && root, "null argument");
    c->config.output_root = root;
  });
}

v2s_status v2s_config_set_workers(v2s_config* c, int workers) {
  return guard([&] {
    require(c, "null argument");
    c->config.workers = workers;
  });
}

v2s_status v2s_config_set_resolution(v2s_config* c, int resolution) {
  return guard([&] {
    require(c, "null argument");
    c->config.grid_resolution = resolution;
  });
}

v2s_status v2s_config_set_mls_radius(v2s_config* c, double radius) {
  return guard([&] {
    require(c, "null argument");
    c->config.mls_radius = radius;
  });
}

double v2s_config_mls_radius(const v2s_config* c) { return c ? c->config.mls_radius : 0.0; }

int v2s_config_resolution(const v2s_config* c) { return c ? c->config.grid_resolution : 0; }

v2s_status v2s_generate(const v2s_config* c, int count, uint64_t seed0, const char* root,
                        v2s_generate_result* result) {
  return guard([&] {
    require(c, "null argument");
    const std::string dir = root ? root : c->config.output_root;
    require(!dir.empty(), "no output root given");
    const v2s::GenerateSummary s = v2s::cmd_generate(c->config, count, seed0, dir);
    if (result) *result = {s.attempted, s.accepted, static_cast<int>(s.computed.size())};
  });
}

v2s_status v2s_generate_summary_json(const char* root, char** out) {
  return guard([&] {
    require(root && out, "null argument");
    const v2s::Manifest m = v2s::read_manifest((std::filesystem::path(root) / "manifest.jsonl").string());
    const nlohmann::json j = {{"attempted", m.records.size()},
                              {"accepted", m.accepted_count()},
                              {"discarded", m.discard_counts()},
                              {"config_hash", m.config_hash}};
    *out = dup_string(j.dump());
  });
}

v2s_status v2s_voxelize(const v2s_config* c, const char* preop_path, const char* intraop_path, const char* out_path,
                        const v2s_voxelize_opts* opts) {
  return guard([&] {
    require(c && preop_path && intraop_path && out_path, "null argument");
    v2s::VoxelizeOptions o;
    o.resolution = c->config.grid_resolution;
    o.mls_radius = c->config.mls_radius;
    if (opts) {
      if (opts->resolution > 0) o.resolution = opts->resolution;
      o.mls_radius = opts->mls_radius;
      if (opts->transform_path) o.transform = v2s::read_transform(opts->transform_path);
      o.prealign = opts->prealign != 0;
    }
    v2s::cmd_voxelize(c->config, preop_path, intraop_path, out_path, o);
  });
}

v2s_status v2s_eval(const char* prediction_glob, const char* manifest_path, const char* out_csv,
                    v2s_eval_result* result) {
  return guard([&] {
    require(prediction_glob && manifest_path && out_csv, "null argument");
    const v2s::EvalSummary s = v2s::cmd_eval(prediction_glob, manifest_path, out_csv);
    if (result) *result = {static_cast<int>(s.stats.size()), s.skipped, s.missing};
  });
}

v2s_status v2s_inspect(const char* path, char** out) {
  return guard([&] {
    require(path && out, "null argument");
    *out = dup_string(v2s::cmd_inspect(path));
  });
}

v2s_status v2s_transfer_markers(const char* sample_path, const char* markers_csv, const char* out_csv, double radius,
                                const char* reference_csv, double* mean_error, double* max_error) {
  return guard([&] {
    require(sample_path && markers_csv && out_csv, "null argument");
    const v2s::Sample s = v2s::read_sample(sample_path);
    if (s.u.empty()) throw v2s::Error(v2s::ErrorCode::kFormat, std::string(sample_path) + " holds no displacement");
    const v2s::GridField* mask = s.sdf_p.empty() ? nullptr : &s.sdf_p;
    const v2s::MarkerSet moved = v2s::transfer_markers(s.u, v2s::read_markers(markers_csv), radius, mask);
    v2s::write_markers(moved, out_csv);
    if (reference_csv) {
      const v2s::MarkerErrors e = v2s::marker_error(moved, v2s::read_markers(reference_csv));
      if (mean_error) *mean_error = e.mean;
      if (max_error) *max_error = e.max;
    }
  });
}

}  // extern "C"
