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

#include <span>
#include <vector>

#include "v2s/common.hpp"

namespace v2s {

// Triangle surface in meters. Also carries open patches and point/triangle
// soups (vertices not referenced by any triangle are kept as points).
struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<Tri> triangles;

  bool empty() const { return vertices.empty(); }
};

// Throws kInvalidArgument when a triangle index is out of range.
void validate_indices(const SurfaceMesh& mesh);

Vec3 triangle_area_vector(const Vec3& a, const Vec3& b, const Vec3& c);
double triangle_area(const SurfaceMesh& mesh, int t);
double surface_area(const SurfaceMesh& mesh);
// Divergence-theorem volume; positive for outward orientation.
double signed_volume(const SurfaceMesh& mesh);
Aabb bounding_box(const SurfaceMesh& mesh);
Aabb bounding_box(std::span<const Vec3> points);

inline uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<uint32_t>(std::min(a, b));
  const auto hi = static_cast<uint32_t>(std::max(a, b));
  return (static_cast<uint64_t>(lo) << 32) | hi;
}

// V - E + F over referenced vertices.
int euler_characteristic(const SurfaceMesh& mesh);
// Every directed edge is matched by an opposite one (closed oriented chain).
bool is_closed(const SurfaceMesh& mesh);
// Every undirected edge is shared by exactly two triangles.
bool is_edge_manifold(const SurfaceMesh& mesh);

// Connected components over shared edges. Returns the component id per
// triangle and writes the number of components.
std::vector<int> triangle_components(const SurfaceMesh& mesh, int& count);

// Edge-adjacent triangles, ordered by triangle index.
std::vector<std::vector<int>> triangle_adjacency(const SurfaceMesh& mesh);

// Drops vertices not used by a triangle and renumbers.
SurfaceMesh remove_unreferenced(const SurfaceMesh& mesh);
SurfaceMesh keep_triangles(const SurfaceMesh& mesh, std::span<const int> triangle_ids);

SurfaceMesh transformed(const SurfaceMesh& mesh, const Mat3& rotation, const Vec3& translation);

// Closest point on triangle (a, b, c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Signed solid angle subtended by oriented triangle (a, b, c) at q.
double solid_angle(const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c);

// Generalized winding number summed exactly over all triangles.
double winding_number_exact(const SurfaceMesh& mesh, const Vec3& q);

// Inside test by generalized winding number with threshold 0.5; a point on
// the surface resolves to outside. Uses the hierarchical evaluator.
std::vector<bool> classify_inside(std::span<const Vec3> points, const SurfaceMesh& surface);

}  // namespace v2s
