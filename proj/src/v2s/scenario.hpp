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

#pragma once

#include <cstdint>
#include <string>

#include "v2s/fem.hpp"

namespace v2s {

struct ScenarioParams {
  Range<int> load_patch_count{1, 3};
  double max_force = 1.5;  // N
  Range<double> youngs_modulus{2000.0, 5000.0};  // Pa
  double poissons_ratio = 0.35;
  // Patch sizes as fractions of the boundary area.
  Range<double> load_patch_fraction{0.01, 0.05};
  Range<double> fixed_patch_fraction{0.05, 0.20};
  int max_retries = 32;

  void validate() const;
};

// Random loads and a fixed patch on the mesh boundary. Every patch is an
// edge-connected set of boundary triangles grown breadth-first from a random
// seed triangle; no two patches share a vertex. Throws kRetryExhausted when
// disjoint patches cannot be placed.
Scenario sample_scenario(uint64_t seed, const TetMesh& mesh, const ScenarioParams& params = {});

struct PartialSurfaceParams {
  uint64_t seed = 0;
  Range<double> visible_fraction{0.1, 0.6};
  double resample_spacing = 0.002;  // m, max edge length after subdivision
  double vertex_jitter = 0.001;     // m, per axis
  double dropout_fraction = 0.2;
  Range<int> hole_count{0, 3};
  Range<double> hole_radius{0.005, 0.015};  // m
  int max_subdivision_levels = 4;

  void validate() const;
};

struct PartialSurface {
  SurfaceMesh surface;  // open triangle soup, unreferenced vertices are points
  // Patch area over total area, measured before any corruption.
  double visible_fraction = 0.0;
};

// Simulated intraoperative view: a contiguous patch of the deformed boundary,
// subdivided, with vertex dropout, occluding holes and per-axis jitter.
// Throws kOpenSurface if the boundary is not closed.
PartialSurface extract_partial_surface(const SurfaceMesh& deformed_boundary, const PartialSurfaceParams& params);

struct SampleMeta {
  uint64_t seed = 0;
  MaterialParams material;
  double visible_fraction = 0.0;
  double mean_displacement = 0.0;  // m, over mesh vertices
  double max_displacement = 0.0;   // m
  bool accepted = false;
  std::string reason;            // "" when accepted
  std::string upstream_failure;  // "generation", "meshing", "scenario" or "solver"
  int flip_code = 0;             // bit 0 = X, 1 = Y, 2 = Z
};

struct AcceptanceParams {
  double max_displacement = 0.20;  // m
  double min_visible_fraction = 0.10;
};

struct AcceptDecision {
  bool accepted = false;
  std::string reason;
};

// Upstream failures take precedence, then "displacement", then "visibility".
AcceptDecision accept_sample(const SampleMeta& meta, const AcceptanceParams& params = {});

}  // namespace v2s
