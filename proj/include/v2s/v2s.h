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

#ifndef V2S_V2S_H_
#define V2S_V2S_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(V2S_BUILDING_LIBRARY)
#define V2S_API __attribute__((visibility("default")))
#else
#define V2S_API
#endif

/*
 * Synthetic volume-to-surface registration data: random organ meshes,
 * hyperelastic deformation, distance-field voxelization and scoring.
 *
 * Every function returning v2s_status reports failures through the status
 * code; v2s_last_error() then holds a message for the calling thread.
 * Objects are opaque and released with their *_free function. Positions are
 * in meters, forces in newtons, arrays of 3-vectors are packed xyz.
 */

typedef enum v2s_status {
  V2S_OK = 0,
  V2S_ERR_INVALID_ARGUMENT = 1,
  V2S_ERR_GENERATION = 2,
  V2S_ERR_MESHING = 3,
  V2S_ERR_INVERTED_ELEMENT = 4,
  V2S_ERR_NON_CONVERGENCE = 5,
  V2S_ERR_DOMAIN = 6,
  V2S_ERR_OPEN_SURFACE = 7,
  V2S_ERR_IO = 8,
  V2S_ERR_FORMAT = 9,
  V2S_ERR_LENGTH_MISMATCH = 10,
  V2S_ERR_NAN = 11,
  V2S_ERR_SPEC_MISMATCH = 12,
  V2S_ERR_LABEL_MISMATCH = 13,
  V2S_ERR_OUT_OF_GRID = 14,
  V2S_ERR_DEGENERATE = 15,
  V2S_ERR_CONFIG = 16,
  V2S_ERR_RETRY_EXHAUSTED = 17,
  V2S_ERR_DIVISIBILITY = 18,
  V2S_ERR_INTERNAL = 99
} v2s_status;

typedef enum v2s_log_level {
  V2S_LOG_DEBUG = 0,
  V2S_LOG_INFO = 1,
  V2S_LOG_WARN = 2,
  V2S_LOG_ERROR = 3,
  V2S_LOG_OFF = 4
} v2s_log_level;

typedef struct v2s_surface v2s_surface;
typedef struct v2s_tetmesh v2s_tetmesh;
typedef struct v2s_scenario v2s_scenario;
typedef struct v2s_sample v2s_sample;
typedef struct v2s_config v2s_config;

V2S_API const char* v2s_version(void);
/* Message of the last failed call on this thread ("" if none). */
V2S_API const char* v2s_last_error(void);
V2S_API const char* v2s_status_name(v2s_status status);
V2S_API void v2s_set_log_level(v2s_log_level level);
/* Releases strings returned through char** out-parameters. */
V2S_API void v2s_string_free(char* str);

/* ---- Surfaces ---------------------------------------------------------- */

typedef struct v2s_gen_params {
  uint64_t seed;
  int num_blobs_min, num_blobs_max;
  double blob_radius_min, blob_radius_max;
  double target_edge_length;
  int smoothing_iterations;
  double bbox_diagonal_min, bbox_diagonal_max;
  double subtract_probability;
  int max_retries;
} v2s_gen_params;

V2S_API void v2s_gen_params_default(v2s_gen_params* params);

V2S_API v2s_status v2s_surface_create(const double* vertices, size_t vertex_count, const int32_t* triangles,
                                      size_t triangle_count, v2s_surface** out);
/* Random closed organ-like surface, a pure function of params. */
V2S_API v2s_status v2s_surface_generate(const v2s_gen_params* params, v2s_surface** out);
/* PLY (ASCII or binary). */
V2S_API v2s_status v2s_surface_load(const char* path, v2s_surface** out);
/* Binary little-endian PLY. */
V2S_API v2s_status v2s_surface_save(const v2s_surface* surface, const char* path);
V2S_API void v2s_surface_free(v2s_surface* surface);
V2S_API size_t v2s_surface_vertex_count(const v2s_surface* surface);
V2S_API size_t v2s_surface_triangle_count(const v2s_surface* surface);
/* Copy 3 * vertex_count doubles / 3 * triangle_count indices. */
V2S_API v2s_status v2s_surface_vertices(const v2s_surface* surface, double* out);
V2S_API v2s_status v2s_surface_triangles(const v2s_surface* surface, int32_t* out);
V2S_API v2s_status v2s_surface_is_closed(const v2s_surface* surface, int* closed);
/* inside[i] = 1 if point i lies strictly inside the closed surface. */
V2S_API v2s_status v2s_surface_classify_inside(const v2s_surface* surface, const double* points, size_t count,
                                               uint8_t* inside);

/* ---- Tetrahedral meshes ------------------------------------------------ */

V2S_API v2s_status v2s_tetmesh_create(const double* vertices, size_t vertex_count, const int32_t* tets,
                                      size_t tet_count, v2s_tetmesh** out);
V2S_API v2s_status v2s_tetrahedralize(const v2s_surface* surface, double target_edge, double quality_floor,
                                      v2s_tetmesh** out);
V2S_API v2s_status v2s_tetmesh_load(const char* path, v2s_tetmesh** out);
V2S_API v2s_status v2s_tetmesh_save(const v2s_tetmesh* mesh, const char* path);
V2S_API void v2s_tetmesh_free(v2s_tetmesh* mesh);
V2S_API size_t v2s_tetmesh_vertex_count(const v2s_tetmesh* mesh);
V2S_API size_t v2s_tetmesh_tet_count(const v2s_tetmesh* mesh);
V2S_API v2s_status v2s_tetmesh_vertices(const v2s_tetmesh* mesh, double* out);
V2S_API v2s_status v2s_tetmesh_tets(const v2s_tetmesh* mesh, int32_t* out);
V2S_API v2s_status v2s_tetmesh_volume(const v2s_tetmesh* mesh, double* volume);
/* Outward-oriented boundary surface at rest positions. */
V2S_API v2s_status v2s_tetmesh_boundary(const v2s_tetmesh* mesh, v2s_surface** out);

/* ---- Finite elements --------------------------------------------------- */

V2S_API v2s_status v2s_lame_from_elastic(double youngs_modulus, double poissons_ratio, double* mu, double* lambda);
/* F is row-major 3x3. */
V2S_API v2s_status v2s_strain_energy_density(const double* F, double youngs_modulus, double poissons_ratio,
                                             double* energy);

V2S_API v2s_status v2s_scenario_create(double youngs_modulus, double poissons_ratio, v2s_scenario** out);
/* Random loads and fixed patch on the mesh boundary. */
V2S_API v2s_status v2s_scenario_sample(uint64_t seed, const v2s_tetmesh* mesh, v2s_scenario** out);
V2S_API void v2s_scenario_free(v2s_scenario* scenario);
V2S_API v2s_status v2s_scenario_fix_vertices(v2s_scenario* scenario, const int32_t* vertices, size_t count);
/* Constrains a single displacement component (0 = x, 1 = y, 2 = z). */
V2S_API v2s_status v2s_scenario_constrain_axis(v2s_scenario* scenario, const int32_t* vertices, size_t count,
                                               int axis);
V2S_API v2s_status v2s_scenario_add_load(v2s_scenario* scenario, const int32_t* vertices, size_t count,
                                         const double* force);
V2S_API size_t v2s_scenario_fixed_count(const v2s_scenario* scenario);
V2S_API size_t v2s_scenario_load_count(const v2s_scenario* scenario);
/* Total force of load patch `index` and its vertex count. */
V2S_API v2s_status v2s_scenario_load(const v2s_scenario* scenario, size_t index, double* force,
                                     size_t* vertex_count);
V2S_API v2s_status v2s_scenario_material(const v2s_scenario* scenario, double* youngs_modulus,
                                         double* poissons_ratio);

typedef struct v2s_solver_opts {
  double tolerance;
  int max_newton_steps;
  int load_steps;
  int max_step_halvings;
} v2s_solver_opts;

V2S_API void v2s_solver_opts_default(v2s_solver_opts* opts);
/* Writes 3 * vertex_count displacements. opts may be NULL. */
V2S_API v2s_status v2s_solve_static(const v2s_tetmesh* mesh, const v2s_scenario* scenario,
                                    const v2s_solver_opts* opts, double* displacement);
/* Internal minus external nodal forces, constrained components zeroed. */
V2S_API v2s_status v2s_residual(const v2s_tetmesh* mesh, const double* displacement, const v2s_scenario* scenario,
                                double* residual);

/* ---- Samples ----------------------------------------------------------- */

typedef enum v2s_grid {
  V2S_GRID_SDF = 0, /* signed distance to the preoperative surface */
  V2S_GRID_DF = 1,  /* distance to the intraoperative surface */
  V2S_GRID_U = 2    /* displacement, 3 channels */
} v2s_grid;

V2S_API v2s_status v2s_sample_read(const char* path, v2s_sample** out);
V2S_API v2s_status v2s_sample_write(const v2s_sample* sample, const char* path);
V2S_API void v2s_sample_free(v2s_sample* sample);
/* 1 = sdf + df + u, 2 = sdf + df, 3 = u only. */
V2S_API int v2s_sample_channel_set(const v2s_sample* sample);
V2S_API v2s_status v2s_sample_geometry(const v2s_sample* sample, int* resolution, double* spacing,
                                       double* origin);
/* Copies a grid (x fastest, then y, z, channel). With out == NULL only the
 * value count is reported. */
V2S_API v2s_status v2s_sample_grid(const v2s_sample* sample, v2s_grid grid, float* out, size_t capacity,
                                   size_t* count);
/* Replaces (or adds) the displacement grid; count must be 3 * resolution^3. */
V2S_API v2s_status v2s_sample_set_displacement(v2s_sample* sample, const float* values, size_t count);
/* Mirror along axes (bit 0 = x, 1 = y, 2 = z). */
V2S_API v2s_status v2s_sample_flip(const v2s_sample* sample, int axes, v2s_sample** out);
/* Block-mean downsampling of every grid. */
V2S_API v2s_status v2s_sample_downsample(const v2s_sample* sample, int resolution, v2s_sample** out);
V2S_API v2s_status v2s_sample_meta_json(const v2s_sample* sample, char** out);

typedef struct v2s_error_stats {
  size_t count;
  double mean_error;
  double max_error;
  double p50_error;
  double p90_error;
  double p95_error;
  double mean_target_displacement;
} v2s_error_stats;

/* Error of the prediction's u against the ground truth's u over the ground
 * truth's interior (sdf < 0). */
V2S_API v2s_status v2s_displacement_error(const v2s_sample* prediction, const v2s_sample* truth,
                                          v2s_error_stats* stats);

/* ---- Configuration and pipeline --------------------------------------- */

V2S_API v2s_status v2s_config_default(v2s_config** out);
/* JSON file; unknown keys are rejected with V2S_ERR_CONFIG. */
V2S_API v2s_status v2s_config_load(const char* path, v2s_config** out);
V2S_API v2s_status v2s_config_parse(const char* json, v2s_config** out);
V2S_API void v2s_config_free(v2s_config* config);
V2S_API v2s_status v2s_config_validate(const v2s_config* config);
/* 16 hex digits plus terminator. */
V2S_API v2s_status v2s_config_hash(const v2s_config* config, char* out, size_t capacity);
V2S_API v2s_status v2s_config_json(const v2s_config* config, char** out);
V2S_API const char* v2s_config_output_root(const v2s_config* config);
V2S_API v2s_status v2s_config_set_output_root(v2s_config* config, const char* root);
V2S_API v2s_status v2s_config_set_workers(v2s_config* config, int workers);
V2S_API v2s_status v2s_config_set_resolution(v2s_config* config, int resolution);
V2S_API v2s_status v2s_config_set_mls_radius(v2s_config* config, double radius);
V2S_API double v2s_config_mls_radius(const v2s_config* config);
V2S_API int v2s_config_resolution(const v2s_config* config);

typedef struct v2s_generate_result {
  int attempted; /* records in the manifest */
  int accepted;
  int computed; /* seeds simulated by this call */
} v2s_generate_result;

/* Seeds seed0 .. seed0 + count - 1 under root (config output root if NULL).
 * Resumes an existing dataset; per-sample failures become discards. */
V2S_API v2s_status v2s_generate(const v2s_config* config, int count, uint64_t seed0, const char* root,
                                v2s_generate_result* result);
/* Manifest summary line as JSON. */
V2S_API v2s_status v2s_generate_summary_json(const char* root, char** out);

typedef struct v2s_voxelize_opts {
  int resolution;
  double mls_radius;          /* 0 disables smoothing */
  const char* transform_path; /* 4x4 preop -> intraop, may be NULL */
  int prealign;               /* estimate the transform if none is given */
} v2s_voxelize_opts;

V2S_API v2s_status v2s_voxelize(const v2s_config* config, const char* preop_path, const char* intraop_path,
                                const char* out_path, const v2s_voxelize_opts* opts);

typedef struct v2s_eval_result {
  int scored;
  int skipped;
  int missing;
} v2s_eval_result;

V2S_API v2s_status v2s_eval(const char* prediction_glob, const char* manifest_path, const char* out_csv,
                            v2s_eval_result* result);
V2S_API v2s_status v2s_inspect(const char* path, char** out);

/* Moves the markers of a CSV file by the sample's displacement grid (kernel
 * radius in meters) and writes them to out_csv. With a reference file the
 * mean and max marker errors are reported. */
V2S_API v2s_status v2s_transfer_markers(const char* sample_path, const char* markers_csv, const char* out_csv,
                                        double radius, const char* reference_csv, double* mean_error,
                                        double* max_error);

#ifdef __cplusplus
}
#endif

#endif /* V2S_V2S_H_ */
