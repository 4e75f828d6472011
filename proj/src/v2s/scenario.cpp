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

#include "v2s/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

#include "v2s/rng.hpp"

namespace v2s {

void ScenarioParams::validate() const {
  if (!load_patch_count.valid() || load_patch_count.min < 1)
    throw Error(ErrorCode::kInvalidArgument, "load patch count range must be within [1, inf)");
  if (!(max_force > 0.0)) throw Error(ErrorCode::kInvalidArgument, "max force must be positive");
  if (!youngs_modulus.valid() || !(youngs_modulus.min > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "Young's modulus range must be positive");
  if (!(poissons_ratio >= 0.0 && poissons_ratio < 0.5))
    throw Error(ErrorCode::kInvalidArgument, "Poisson's ratio must lie in [0, 0.5)");
  for (const Range<double>* r : {&load_patch_fraction, &fixed_patch_fraction})
    if (!r->valid() || !(r->min > 0.0) || r->max > 1.0)
      throw Error(ErrorCode::kInvalidArgument, "patch fractions must lie in (0, 1]");
  if (max_retries < 1) throw Error(ErrorCode::kInvalidArgument, "max retries must be positive");
}

namespace {

// Breadth-first triangle region from `start` until its area reaches
// `target_area`. Triangles touching a blocked vertex are skipped. Returns
// the triangles in visiting order and their total area.
std::vector<int> grow_region(const SurfaceMesh& surface, const std::vector<std::vector<int>>& adjacency,
                             const std::vector<double>& areas, int start, double target_area,
                             const std::vector<char>& blocked, double& area) {
  std::vector<int> region;
  area = 0.0;
  auto usable = [&](int t) {
    for (int v : surface.triangles[t])
      if (blocked[v]) return false;
    return true;
  };
  if (!usable(start)) return region;
  std::vector<char> seen(surface.triangles.size(), 0);
  std::deque<int> queue{start};
  seen[start] = 1;
  while (!queue.empty() && area < target_area) {
    const int t = queue.front();
    queue.pop_front();
    region.push_back(t);
    area += areas[t];
    for (int n : adjacency[t]) {
      if (seen[n] || !usable(n)) continue;
      seen[n] = 1;
      queue.push_back(n);
    }
  }
  return region;
}

std::vector<int> region_vertices(const SurfaceMesh& surface, const std::vector<int>& region) {
  std::vector<int> verts;
  for (int t : region)
    for (int v : surface.triangles[t]) verts.push_back(v);
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  return verts;
}

}  // namespace

Scenario sample_scenario(uint64_t seed, const TetMesh& mesh, const ScenarioParams& params) {
  params.validate();
  const SurfaceMesh surface = mesh.boundary_surface();
  if (surface.triangles.empty()) throw Error(ErrorCode::kInvalidArgument, "mesh has no boundary");
  const auto adjacency = triangle_adjacency(surface);
  std::vector<double> areas(surface.triangles.size());
  for (size_t t = 0; t < areas.size(); ++t) areas[t] = triangle_area(surface, static_cast<int>(t));
  double total_area = 0.0;
  for (double a : areas) total_area += a;

  Rng rng(seed, "scenario");
  Scenario s;
  s.material = MaterialParams::from_elastic(rng.uniform(params.youngs_modulus.min, params.youngs_modulus.max),
                                            params.poissons_ratio);
  const int load_count = rng.uniform_int(params.load_patch_count.min, params.load_patch_count.max);

  std::vector<char> blocked(surface.vertices.size(), 0);
  auto place_patch = [&](const Range<double>& fraction) {
    const double target = rng.uniform(fraction.min, fraction.max) * total_area;
    for (int attempt = 0; attempt < params.max_retries; ++attempt) {
      const int start = rng.uniform_int(0, static_cast<int>(surface.triangles.size()) - 1);
      double area = 0.0;
      const auto region = grow_region(surface, adjacency, areas, start, target, blocked, area);
      if (region.empty() || area < target) continue;
      std::vector<int> verts = region_vertices(surface, region);
      for (int v : verts) blocked[v] = 1;
      for (int& v : verts) v = mesh.boundary_vertices()[v];
      std::sort(verts.begin(), verts.end());
      return verts;
    }
    throw Error(ErrorCode::kRetryExhausted, "could not place disjoint boundary patches");
  };

  s.fixed_vertices = place_patch(params.fixed_patch_fraction);
  for (int i = 0; i < load_count; ++i) {
    LoadPatch patch;
    patch.vertices = place_patch(params.load_patch_fraction);
    const Vec3 direction = rng.unit_vector();
    const double magnitude = params.max_force * (1.0 - rng.uniform());  // (0, max]
    patch.force = magnitude * direction;
    s.loads.push_back(std::move(patch));
  }
  return s;
}

void PartialSurfaceParams::validate() const {
  if (!visible_fraction.valid() || !(visible_fraction.min >= 0.1) || visible_fraction.max > 1.0)
    throw Error(ErrorCode::kInvalidArgument, "visible fraction range must lie in [0.1, 1]");
  if (!(resample_spacing > 0.0)) throw Error(ErrorCode::kInvalidArgument, "resample spacing must be positive");
  if (!(vertex_jitter >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "vertex jitter must be nonnegative");
  if (!(dropout_fraction >= 0.0 && dropout_fraction < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "dropout fraction must lie in [0, 1)");
  if (!hole_count.valid() || hole_count.min < 0) throw Error(ErrorCode::kInvalidArgument, "invalid hole count range");
  if (!hole_radius.valid() || hole_radius.min < 0.0)
    throw Error(ErrorCode::kInvalidArgument, "invalid hole radius range");
  if (max_subdivision_levels < 0) throw Error(ErrorCode::kInvalidArgument, "invalid subdivision level cap");
}

namespace {

// One level of 1-to-4 midpoint subdivision.
SurfaceMesh subdivide(const SurfaceMesh& in) {
  SurfaceMesh out;
  out.vertices = in.vertices;
  std::unordered_map<uint64_t, int> midpoints;
  auto midpoint = [&](int a, int b) {
    const auto [it, inserted] = midpoints.try_emplace(edge_key(a, b), static_cast<int>(out.vertices.size()));
    if (inserted) out.vertices.push_back(0.5 * (in.vertices[a] + in.vertices[b]));
    return it->second;
  };
  out.triangles.reserve(in.triangles.size() * 4);
  for (const Tri& t : in.triangles) {
    const int ab = midpoint(t[0], t[1]);
    const int bc = midpoint(t[1], t[2]);
    const int ca = midpoint(t[2], t[0]);
    out.triangles.push_back({t[0], ab, ca});
    out.triangles.push_back({ab, t[1], bc});
    out.triangles.push_back({ca, bc, t[2]});
    out.triangles.push_back({ab, bc, ca});
  }
  return out;
}

double max_edge_length(const SurfaceMesh& m) {
  double longest = 0.0;
  for (const Tri& t : m.triangles)
    for (int k = 0; k < 3; ++k)
      longest = std::max(longest, (m.vertices[t[k]] - m.vertices[t[(k + 1) % 3]]).norm());
  return longest;
}

}  // namespace

PartialSurface extract_partial_surface(const SurfaceMesh& boundary, const PartialSurfaceParams& params) {
  params.validate();
  validate_indices(boundary);
  if (boundary.triangles.empty() || !is_closed(boundary))
    throw Error(ErrorCode::kOpenSurface, "deformed boundary is not a closed surface");
  const auto adjacency = triangle_adjacency(boundary);
  std::vector<double> areas(boundary.triangles.size());
  double total_area = 0.0;
  for (size_t t = 0; t < areas.size(); ++t) total_area += areas[t] = triangle_area(boundary, static_cast<int>(t));
  const std::vector<char> unblocked(boundary.vertices.size(), 0);

  Rng rng(params.seed, "partial");
  constexpr int kAttempts = 64;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    const double fraction = rng.uniform(params.visible_fraction.min, params.visible_fraction.max);
    const int start = rng.uniform_int(0, static_cast<int>(boundary.triangles.size()) - 1);
    double area = 0.0;
    const auto region = grow_region(boundary, adjacency, areas, start, fraction * total_area, unblocked, area);
    const double visible = area / total_area;
    if (visible < params.visible_fraction.min - 1e-9 || visible > params.visible_fraction.max + 1e-9) continue;

    SurfaceMesh patch = remove_unreferenced(keep_triangles(boundary, region));
    for (int level = 0; level < params.max_subdivision_levels && max_edge_length(patch) > params.resample_spacing;
         ++level)
      patch = subdivide(patch);

    std::vector<char> removed(patch.vertices.size(), 0);
    for (size_t v = 0; v < patch.vertices.size(); ++v) removed[v] = rng.bernoulli(params.dropout_fraction);
    const int holes = rng.uniform_int(params.hole_count.min, params.hole_count.max);
    for (int h = 0; h < holes; ++h) {
      const Vec3 center = patch.vertices[rng.uniform_int(0, static_cast<int>(patch.vertices.size()) - 1)];
      const double radius = rng.uniform(params.hole_radius.min, params.hole_radius.max);
      for (size_t v = 0; v < patch.vertices.size(); ++v)
        if ((patch.vertices[v] - center).squaredNorm() <= radius * radius) removed[v] = 1;
    }

    PartialSurface out;
    out.visible_fraction = visible;
    std::vector<int> remap(patch.vertices.size(), -1);
    for (size_t v = 0; v < patch.vertices.size(); ++v) {
      if (removed[v]) continue;
      remap[v] = static_cast<int>(out.surface.vertices.size());
      Vec3 p = patch.vertices[v];
      for (int k = 0; k < 3; ++k) p[k] += rng.uniform(-params.vertex_jitter, params.vertex_jitter);
      out.surface.vertices.push_back(p);
    }
    for (const Tri& t : patch.triangles)
      if (remap[t[0]] >= 0 && remap[t[1]] >= 0 && remap[t[2]] >= 0)
        out.surface.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
    if (!out.surface.vertices.empty()) return out;
  }
  throw Error(ErrorCode::kRetryExhausted, "every extracted patch was empty");
}

AcceptDecision accept_sample(const SampleMeta& meta, const AcceptanceParams& params) {
  if (!meta.upstream_failure.empty()) return {false, meta.upstream_failure};
  if (!(meta.max_displacement <= params.max_displacement)) return {false, "displacement"};
  if (!(meta.visible_fraction >= params.min_visible_fraction)) return {false, "visibility"};
  return {true, ""};
}

}  // namespace v2s
