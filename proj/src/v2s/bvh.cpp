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

#include "v2s/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace v2s {

namespace {
constexpr double kInv4Pi = 0.25 / std::numbers::pi;
// Pruning slack so that a box is only skipped when none of its primitives can
// tie the current best after rounding.
constexpr double kPruneSlack = 1.0 + 1e-12;
}  // namespace

TriangleBvh::TriangleBvh(const SurfaceMesh& mesh, const Options& options)
    : mesh_(&mesh), options_(options) {
  validate_indices(mesh);
  triangle_count_ = static_cast<int>(mesh.triangles.size());
  if (options_.include_isolated_vertices) {
    std::vector<char> used(mesh.vertices.size(), 0);
    for (const Tri& t : mesh.triangles)
      for (int v : t) used[v] = 1;
    for (size_t v = 0; v < used.size(); ++v)
      if (!used[v]) isolated_.push_back(static_cast<int>(v));
  }
  const int n = triangle_count_ + static_cast<int>(isolated_.size());
  if (n == 0) return;
  prims_.resize(n);
  for (int i = 0; i < n; ++i) prims_[i] = i;
  nodes_.reserve(2 * n / std::max(1, options_.leaf_size) + 2);
  build(0, n, 0);
}

void TriangleBvh::primitive_box(int prim, Aabb& box) const {
  if (prim < triangle_count_) {
    for (int v : mesh_->triangles[prim]) box.extend(mesh_->vertices[v]);
  } else {
    box.extend(mesh_->vertices[isolated_[prim - triangle_count_]]);
  }
}

Vec3 TriangleBvh::primitive_centroid(int prim) const {
  if (prim < triangle_count_) {
    const Tri& t = mesh_->triangles[prim];
    return (mesh_->vertices[t[0]] + mesh_->vertices[t[1]] + mesh_->vertices[t[2]]) / 3.0;
  }
  return mesh_->vertices[isolated_[prim - triangle_count_]];
}

int TriangleBvh::build(int begin, int end, int depth) {
  const int index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  {
    Node& node = nodes_[index];
    node.begin = begin;
    node.end = end;
    for (int i = begin; i < end; ++i) primitive_box(prims_[i], node.box);
  }

  // Multipole moments about the area-weighted centroid.
  Vec3 area_sum = Vec3::Zero();
  Vec3 weighted = Vec3::Zero();
  double area_total = 0.0;
  for (int i = begin; i < end; ++i) {
    const int p = prims_[i];
    if (p >= triangle_count_) continue;
    const Tri& t = mesh_->triangles[p];
    const Vec3 av = triangle_area_vector(mesh_->vertices[t[0]], mesh_->vertices[t[1]], mesh_->vertices[t[2]]);
    const double a = av.norm();
    area_sum += av;
    weighted += a * primitive_centroid(p);
    area_total += a;
  }
  const Vec3 center = area_total > 0.0 ? Vec3(weighted / area_total) : nodes_[index].box.center();
  Mat3 moment = Mat3::Zero();
  double radius = 0.0;
  for (int i = begin; i < end; ++i) {
    const int p = prims_[i];
    if (p >= triangle_count_) continue;
    const Tri& t = mesh_->triangles[p];
    const Vec3 av = triangle_area_vector(mesh_->vertices[t[0]], mesh_->vertices[t[1]], mesh_->vertices[t[2]]);
    moment += (primitive_centroid(p) - center) * av.transpose();
    for (int v : t) radius = std::max(radius, (mesh_->vertices[v] - center).norm());
  }
  {
    Node& node = nodes_[index];
    node.area_sum = area_sum;
    node.center = center;
    node.moment = moment;
    node.radius = radius;
  }

  if (end - begin <= options_.leaf_size || depth > 60) return index;

  Aabb centroid_box;
  for (int i = begin; i < end; ++i) centroid_box.extend(primitive_centroid(prims_[i]));
  const Vec3 ext = centroid_box.extent();
  int axis = 0;
  if (ext[1] > ext[axis]) axis = 1;
  if (ext[2] > ext[axis]) axis = 2;
  const int mid = begin + (end - begin) / 2;
  std::nth_element(prims_.begin() + begin, prims_.begin() + mid, prims_.begin() + end,
                   [&](int a, int b) {
                     const double ca = primitive_centroid(a)[axis];
                     const double cb = primitive_centroid(b)[axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid, end, depth + 1);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

double TriangleBvh::primitive_sq_distance(int prim, const Vec3& q, Vec3& point) const {
  if (prim < triangle_count_) {
    // Canonical vertex order makes the result independent of orientation.
    Tri t = mesh_->triangles[prim];
    std::sort(t.begin(), t.end());
    point = closest_point_on_triangle(q, mesh_->vertices[t[0]], mesh_->vertices[t[1]], mesh_->vertices[t[2]]);
  } else {
    point = mesh_->vertices[isolated_[prim - triangle_count_]];
  }
  return (point - q).squaredNorm();
}

ClosestHit TriangleBvh::closest(const Vec3& q) const {
  ClosestHit best;
  if (nodes_.empty()) return best;
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.box.squared_distance(q) > best.sq_distance * kPruneSlack) continue;
    if (node.leaf()) {
      for (int i = node.begin; i < node.end; ++i) {
        Vec3 point;
        const double d = primitive_sq_distance(prims_[i], q, point);
        if (d < best.sq_distance || (d == best.sq_distance && prims_[i] < best.primitive)) {
          best.sq_distance = d;
          best.point = point;
          best.primitive = prims_[i];
        }
      }
      continue;
    }
    const double dl = nodes_[node.left].box.squared_distance(q);
    const double dr = nodes_[node.right].box.squared_distance(q);
    // Push the farther child first so the nearer one is visited next.
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return best;
}

double TriangleBvh::winding_number(const Vec3& q) const {
  if (nodes_.empty()) return 0.0;
  double omega_sum = 0.0;  // in units of 4*pi
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.area_sum.isZero(0.0) && node.moment.isZero(0.0)) continue;
    const Vec3 r = node.center - q;
    const double dist = r.norm();
    if (!node.leaf() && dist > options_.far_field_ratio * node.radius) {
      // g(r) = r / (4 pi |r|^3); first two terms of its Taylor series.
      const double inv = 1.0 / dist;
      const double inv3 = inv * inv * inv;
      const double inv5 = inv3 * inv * inv;
      omega_sum += kInv4Pi * node.area_sum.dot(r) * inv3;
      const Mat3 jac = kInv4Pi * (inv3 * Mat3::Identity() - 3.0 * inv5 * (r * r.transpose()));
      omega_sum += (jac.array() * node.moment.array()).sum();
      continue;
    }
    if (node.leaf()) {
      for (int i = node.begin; i < node.end; ++i) {
        const int p = prims_[i];
        if (p >= triangle_count_) continue;
        const Tri& t = mesh_->triangles[p];
        omega_sum += kInv4Pi * solid_angle(q, mesh_->vertices[t[0]], mesh_->vertices[t[1]], mesh_->vertices[t[2]]);
      }
      continue;
    }
    stack[top++] = node.left;
    stack[top++] = node.right;
  }
  return omega_sum;
}

bool TriangleBvh::inside(const Vec3& q) const {
  if (nodes_.empty()) return false;
  return inside(q, closest(q).sq_distance);
}

bool TriangleBvh::inside(const Vec3& q, double sq_distance) const {
  if (nodes_.empty()) return false;
  const double tol = 1e-12 * std::max(1.0, diagonal());
  if (sq_distance <= tol * tol) return false;
  return winding_number(q) > 0.5;
}

void TriangleBvh::query_overlap(const Aabb& box, const std::function<void(int)>& visit) const {
  if (nodes_.empty()) return;
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if ((node.box.min.array() > box.max.array()).any() || (node.box.max.array() < box.min.array()).any())
      continue;
    if (node.leaf()) {
      for (int i = node.begin; i < node.end; ++i)
        if (prims_[i] < triangle_count_) visit(prims_[i]);
      continue;
    }
    stack[top++] = node.left;
    stack[top++] = node.right;
  }
}

}  // namespace v2s
