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

#include "v2s/surface_mesh.hpp"

namespace v2s {

// Volumetric organ model. Tets are positively oriented; the boundary is the
// set of faces that belong to exactly one tet, oriented outward.
class TetMesh {
 public:
  TetMesh() = default;
  // Builds the boundary. Throws kInvalidArgument on out-of-range indices.
  TetMesh(std::vector<Vec3> vertices, std::vector<Tet> tets);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Tet>& tets() const { return tets_; }
  const std::vector<Tri>& boundary_faces() const { return boundary_faces_; }
  // Sorted ids of vertices on the boundary.
  const std::vector<int>& boundary_vertices() const { return boundary_vertices_; }

  size_t vertex_count() const { return vertices_.size(); }
  size_t tet_count() const { return tets_.size(); }

  // Compact boundary surface at the given per-vertex positions (rest
  // positions when omitted). Surface vertex i is mesh vertex
  // boundary_vertices()[i].
  SurfaceMesh boundary_surface() const { return boundary_surface(vertices_); }
  SurfaceMesh boundary_surface(std::span<const Vec3> positions) const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Tet> tets_;
  std::vector<Tri> boundary_faces_;
  std::vector<int> boundary_vertices_;
};

double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);
// Normalized radius ratio 3 * inradius / circumradius: 1 for a regular tet,
// 0 for a flat one, negative when inverted.
double tet_quality(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

double total_volume(const TetMesh& mesh);
double min_tet_quality(const TetMesh& mesh);

// Checks orientation and the quality floor; throws kMeshingFailure.
void validate_tet_mesh(const TetMesh& mesh, double quality_floor);

struct TetrahedralizeOptions {
  double quality_floor = 0.1;
  int max_repair_rounds = 40;
  // Relative tolerance on total tet volume vs. enclosed surface volume.
  double volume_tolerance = 0.05;
};

// Body-centered-cubic lattice clipped to the surface interior, with boundary
// vertices snapped onto the surface. Throws kMeshingFailure when the quality
// floor or volume tolerance cannot be met.
TetMesh tetrahedralize(const SurfaceMesh& surface, double target_edge,
                       const TetrahedralizeOptions& options = {});

}  // namespace v2s
