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

#include <functional>
#include <vector>

#include "v2s/surface_mesh.hpp"

namespace v2s {

struct ClosestHit {
  double sq_distance = std::numeric_limits<double>::infinity();
  Vec3 point = Vec3::Zero();
  int primitive = -1;  // triangle index, or triangle_count + k for isolated vertex k
};

// Binary bounding-volume hierarchy over the triangles of a SurfaceMesh.
// Answers nearest-point queries and evaluates the generalized winding number
// hierarchically: clusters far from the query are replaced by a second-order
// multipole expansion of their area-vector field.
class TriangleBvh {
 public:
  struct Options {
    // Treat vertices that no triangle references as point primitives.
    bool include_isolated_vertices = false;
    int leaf_size = 4;
    // A cluster is expanded once the query is farther than
    // far_field_ratio * cluster radius from its center.
    double far_field_ratio = 2.5;
  };

  TriangleBvh() = default;
  explicit TriangleBvh(const SurfaceMesh& mesh) : TriangleBvh(mesh, Options{}) {}
  TriangleBvh(const SurfaceMesh& mesh, const Options& options);

  bool empty() const { return nodes_.empty(); }
  const SurfaceMesh& mesh() const { return *mesh_; }
  double diagonal() const { return nodes_.empty() ? 0.0 : nodes_[0].box.diagonal(); }

  // Distance ties resolve to the same value regardless of traversal order.
  ClosestHit closest(const Vec3& q) const;
  double winding_number(const Vec3& q) const;
  // Winding number > 0.5 and not on the surface.
  bool inside(const Vec3& q) const;
  // Same, reusing a squared surface distance already computed for q.
  bool inside(const Vec3& q, double sq_distance) const;

  // Calls visit(triangle) for every triangle whose box overlaps `box`.
  void query_overlap(const Aabb& box, const std::function<void(int)>& visit) const;

 private:
  struct Node {
    Aabb box;
    int left = -1;
    int right = -1;
    int begin = 0;
    int end = 0;
    // Multipole data (triangles only).
    Vec3 area_sum = Vec3::Zero();
    Vec3 center = Vec3::Zero();
    Mat3 moment = Mat3::Zero();
    double radius = 0.0;
    bool leaf() const { return left < 0; }
  };

  int build(int begin, int end, int depth);
  void primitive_box(int prim, Aabb& box) const;
  Vec3 primitive_centroid(int prim) const;
  double primitive_sq_distance(int prim, const Vec3& q, Vec3& point) const;

  const SurfaceMesh* mesh_ = nullptr;
  Options options_;
  std::vector<int> prims_;    // primitive ids, leaf ranges index into this
  std::vector<int> isolated_; // vertex ids of isolated point primitives
  std::vector<Node> nodes_;
  int triangle_count_ = 0;
};

}  // namespace v2s
