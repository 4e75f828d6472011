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

#include "v2s/surface_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include "v2s/bvh.hpp"

namespace v2s {

void validate_indices(const SurfaceMesh& mesh) {
  const int n = static_cast<int>(mesh.vertices.size());
  for (const Tri& t : mesh.triangles) {
    for (int v : t) {
      if (v < 0 || v >= n) {
        throw Error(ErrorCode::kInvalidArgument,
                    "triangle index " + std::to_string(v) + " out of range for " +
                        std::to_string(n) + " vertices");
      }
    }
  }
}

Vec3 triangle_area_vector(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a);
}

double triangle_area(const SurfaceMesh& mesh, int t) {
  const Tri& tri = mesh.triangles[t];
  return triangle_area_vector(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]])
      .norm();
}

double surface_area(const SurfaceMesh& mesh) {
  double area = 0.0;
  for (size_t t = 0; t < mesh.triangles.size(); ++t) area += triangle_area(mesh, static_cast<int>(t));
  return area;
}

double signed_volume(const SurfaceMesh& mesh) {
  double six_v = 0.0;
  for (const Tri& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    six_v += a.dot(b.cross(c));
  }
  return six_v / 6.0;
}

Aabb bounding_box(std::span<const Vec3> points) {
  Aabb box;
  for (const Vec3& p : points) box.extend(p);
  return box;
}

Aabb bounding_box(const SurfaceMesh& mesh) { return bounding_box(mesh.vertices); }

int euler_characteristic(const SurfaceMesh& mesh) {
  std::vector<char> used(mesh.vertices.size(), 0);
  std::vector<uint64_t> edges;
  edges.reserve(mesh.triangles.size() * 3);
  for (const Tri& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      used[t[k]] = 1;
      edges.push_back(edge_key(t[k], t[(k + 1) % 3]));
    }
  }
  std::sort(edges.begin(), edges.end());
  const auto e = std::unique(edges.begin(), edges.end()) - edges.begin();
  const auto v = std::count(used.begin(), used.end(), 1);
  return static_cast<int>(v - e + static_cast<long>(mesh.triangles.size()));
}

bool is_closed(const SurfaceMesh& mesh) {
  // +1 for a->b with a<b, -1 for the reverse; a closed chain sums to zero.
  std::unordered_map<uint64_t, int> balance;
  balance.reserve(mesh.triangles.size() * 3);
  for (const Tri& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      if (a == b) continue;
      balance[edge_key(a, b)] += (a < b) ? 1 : -1;
    }
  }
  if (mesh.triangles.empty()) return false;
  return std::all_of(balance.begin(), balance.end(), [](const auto& kv) { return kv.second == 0; });
}

bool is_edge_manifold(const SurfaceMesh& mesh) {
  std::unordered_map<uint64_t, int> count;
  for (const Tri& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) ++count[edge_key(t[k], t[(k + 1) % 3])];
  return std::all_of(count.begin(), count.end(), [](const auto& kv) { return kv.second == 2; });
}

std::vector<std::vector<int>> triangle_adjacency(const SurfaceMesh& mesh) {
  std::unordered_map<uint64_t, std::vector<int>> by_edge;
  by_edge.reserve(mesh.triangles.size() * 3);
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Tri& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) by_edge[edge_key(tri[k], tri[(k + 1) % 3])].push_back(static_cast<int>(t));
  }
  std::vector<std::vector<int>> adj(mesh.triangles.size());
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Tri& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      for (int other : by_edge[edge_key(tri[k], tri[(k + 1) % 3])])
        if (other != static_cast<int>(t)) adj[t].push_back(other);
    }
    std::sort(adj[t].begin(), adj[t].end());
    adj[t].erase(std::unique(adj[t].begin(), adj[t].end()), adj[t].end());
  }
  return adj;
}

std::vector<int> triangle_components(const SurfaceMesh& mesh, int& count) {
  const auto adj = triangle_adjacency(mesh);
  std::vector<int> comp(mesh.triangles.size(), -1);
  count = 0;
  std::vector<int> stack;
  for (size_t seed = 0; seed < comp.size(); ++seed) {
    if (comp[seed] >= 0) continue;
    comp[seed] = count;
    stack.assign(1, static_cast<int>(seed));
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      for (int n : adj[t]) {
        if (comp[n] < 0) {
          comp[n] = count;
          stack.push_back(n);
        }
      }
    }
    ++count;
  }
  return comp;
}

SurfaceMesh remove_unreferenced(const SurfaceMesh& mesh) {
  std::vector<int> remap(mesh.vertices.size(), -1);
  SurfaceMesh out;
  for (const Tri& t : mesh.triangles)
    for (int v : t) remap[v] = 0;
  for (size_t v = 0; v < remap.size(); ++v) {
    if (remap[v] == 0) {
      remap[v] = static_cast<int>(out.vertices.size());
      out.vertices.push_back(mesh.vertices[v]);
    }
  }
  out.triangles.reserve(mesh.triangles.size());
  for (const Tri& t : mesh.triangles) out.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
  return out;
}

SurfaceMesh keep_triangles(const SurfaceMesh& mesh, std::span<const int> triangle_ids) {
  SurfaceMesh sub;
  sub.vertices = mesh.vertices;
  sub.triangles.reserve(triangle_ids.size());
  for (int t : triangle_ids) sub.triangles.push_back(mesh.triangles[t]);
  return remove_unreferenced(sub);
}

SurfaceMesh transformed(const SurfaceMesh& mesh, const Mat3& rotation, const Vec3& translation) {
  SurfaceMesh out = mesh;
  for (Vec3& v : out.vertices) v = rotation * v + translation;
  return out;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Voronoi-region walk (Ericson, Real-Time Collision Detection 5.1.5).
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return a + v * ab;
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return a + w * ac;
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  const double denom = va + vb + vc;
  if (denom == 0.0) return a;  // degenerate triangle collapsed to a point
  const double v = vb / denom;
  const double w = vc / denom;
  return a + ab * v + ac * w;
}

double solid_angle(const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Van Oosterom & Strackee.
  const Vec3 ra = a - q;
  const Vec3 rb = b - q;
  const Vec3 rc = c - q;
  const double la = ra.norm(), lb = rb.norm(), lc = rc.norm();
  const double det = ra.dot(rb.cross(rc));
  const double den = la * lb * lc + ra.dot(rb) * lc + rb.dot(rc) * la + rc.dot(ra) * lb;
  return 2.0 * std::atan2(det, den);
}

double winding_number_exact(const SurfaceMesh& mesh, const Vec3& q) {
  double omega = 0.0;
  for (const Tri& t : mesh.triangles)
    omega += solid_angle(q, mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
  return omega / (4.0 * std::numbers::pi);
}

std::vector<bool> classify_inside(std::span<const Vec3> points, const SurfaceMesh& surface) {
  validate_indices(surface);
  const TriangleBvh bvh(surface);
  std::vector<bool> inside(points.size());
  for (size_t i = 0; i < points.size(); ++i) inside[i] = bvh.inside(points[i]);
  return inside;
}

}  // namespace v2s
