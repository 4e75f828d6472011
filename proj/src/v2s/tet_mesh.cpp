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

#include "v2s/tet_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "v2s/bvh.hpp"

namespace v2s {

namespace {

// Outward faces of a positively oriented tet.
constexpr int kTetFaces[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

struct FaceRecord {
  std::array<int, 3> key;
  Tri oriented;
};

void find_boundary(const std::vector<Tet>& tets, std::vector<Tri>& faces, std::vector<int>& verts,
                   size_t vertex_count) {
  std::vector<FaceRecord> all;
  all.reserve(tets.size() * 4);
  for (const Tet& t : tets) {
    for (const auto& f : kTetFaces) {
      FaceRecord r;
      r.oriented = {t[f[0]], t[f[1]], t[f[2]]};
      r.key = r.oriented;
      std::sort(r.key.begin(), r.key.end());
      all.push_back(r);
    }
  }
  std::sort(all.begin(), all.end(), [](const FaceRecord& a, const FaceRecord& b) { return a.key < b.key; });
  faces.clear();
  std::vector<char> on_boundary(vertex_count, 0);
  for (size_t i = 0; i < all.size();) {
    size_t j = i + 1;
    while (j < all.size() && all[j].key == all[i].key) ++j;
    if (j - i == 1) {
      faces.push_back(all[i].oriented);
      for (int v : all[i].oriented) on_boundary[v] = 1;
    }
    i = j;
  }
  verts.clear();
  for (size_t v = 0; v < vertex_count; ++v)
    if (on_boundary[v]) verts.push_back(static_cast<int>(v));
}

}  // namespace

TetMesh::TetMesh(std::vector<Vec3> vertices, std::vector<Tet> tets)
    : vertices_(std::move(vertices)), tets_(std::move(tets)) {
  const int n = static_cast<int>(vertices_.size());
  for (const Tet& t : tets_)
    for (int v : t)
      if (v < 0 || v >= n) throw Error(ErrorCode::kInvalidArgument, "tet index out of range");
  find_boundary(tets_, boundary_faces_, boundary_vertices_, vertices_.size());
}

SurfaceMesh TetMesh::boundary_surface(std::span<const Vec3> positions) const {
  if (positions.size() != vertices_.size())
    throw Error(ErrorCode::kInvalidArgument, "position count does not match tet mesh vertex count");
  std::vector<int> local(vertices_.size(), -1);
  SurfaceMesh s;
  s.vertices.reserve(boundary_vertices_.size());
  for (int v : boundary_vertices_) {
    local[v] = static_cast<int>(s.vertices.size());
    s.vertices.push_back(positions[v]);
  }
  s.triangles.reserve(boundary_faces_.size());
  for (const Tri& f : boundary_faces_) s.triangles.push_back({local[f[0]], local[f[1]], local[f[2]]});
  return s;
}

double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

double tet_quality(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const double vol = tet_signed_volume(a, b, c, d);
  const Vec3 u = b - a, v = c - a, w = d - a;
  const double area = triangle_area_vector(b, c, d).norm() + triangle_area_vector(a, c, b).norm() +
                      triangle_area_vector(a, b, d).norm() + triangle_area_vector(a, d, c).norm();
  if (area <= 0.0 || vol == 0.0) return 0.0;
  const double inradius = 3.0 * std::abs(vol) / area;
  const Vec3 num = u.squaredNorm() * v.cross(w) + v.squaredNorm() * w.cross(u) + w.squaredNorm() * u.cross(v);
  const double circumradius = num.norm() / (12.0 * std::abs(vol));
  const double q = 3.0 * inradius / circumradius;
  return vol > 0 ? q : -q;
}

double total_volume(const TetMesh& mesh) {
  double vol = 0.0;
  const auto& V = mesh.vertices();
  for (const Tet& t : mesh.tets()) vol += tet_signed_volume(V[t[0]], V[t[1]], V[t[2]], V[t[3]]);
  return vol;
}

double min_tet_quality(const TetMesh& mesh) {
  double q = std::numeric_limits<double>::infinity();
  const auto& V = mesh.vertices();
  for (const Tet& t : mesh.tets()) q = std::min(q, tet_quality(V[t[0]], V[t[1]], V[t[2]], V[t[3]]));
  return q;
}

void validate_tet_mesh(const TetMesh& mesh, double quality_floor) {
  const auto& V = mesh.vertices();
  for (size_t i = 0; i < mesh.tets().size(); ++i) {
    const Tet& t = mesh.tets()[i];
    if (tet_signed_volume(V[t[0]], V[t[1]], V[t[2]], V[t[3]]) <= 0.0)
      throw Error(ErrorCode::kMeshingFailure, "tet " + std::to_string(i) + " is inverted");
    const double q = tet_quality(V[t[0]], V[t[1]], V[t[2]], V[t[3]]);
    if (q < quality_floor) {
      std::ostringstream os;
      os << "tet " << i << " quality " << q << " below floor " << quality_floor;
      throw Error(ErrorCode::kMeshingFailure, os.str());
    }
  }
}

namespace {

struct Lattice {
  Vec3 origin;  // position of corner (0,0,0)
  double a = 0;
  int nx = 0, ny = 0, nz = 0;  // cells per axis; corners are nx+1 per axis

  int corner(int i, int j, int k) const { return (k * (ny + 1) + j) * (nx + 1) + i; }
  int center(int i, int j, int k) const {
    return (nx + 1) * (ny + 1) * (nz + 1) + (k * ny + j) * nx + i;
  }
  int vertex_count() const { return (nx + 1) * (ny + 1) * (nz + 1) + nx * ny * nz; }
  Vec3 position(int id) const {
    const int corners = (nx + 1) * (ny + 1) * (nz + 1);
    if (id < corners) {
      const int i = id % (nx + 1), j = (id / (nx + 1)) % (ny + 1), k = id / ((nx + 1) * (ny + 1));
      return origin + a * Vec3(i, j, k);
    }
    id -= corners;
    const int i = id % nx, j = (id / nx) % ny, k = id / (nx * ny);
    return origin + a * Vec3(i + 0.5, j + 0.5, k + 0.5);
  }
};

// Every BCC tet: two neighboring cell centers plus one edge of their shared
// face.
std::vector<Tet> bcc_tets(const Lattice& L) {
  std::vector<Tet> tets;
  auto emit = [&](int c1, int c2, int e0, int e1) {
    Tet t{c1, c2, e0, e1};
    if (tet_signed_volume(L.position(t[0]), L.position(t[1]), L.position(t[2]), L.position(t[3])) < 0)
      std::swap(t[2], t[3]);
    tets.push_back(t);
  };
  for (int k = 0; k < L.nz; ++k)
    for (int j = 0; j < L.ny; ++j)
      for (int i = 0; i < L.nx; ++i) {
        const int c = L.center(i, j, k);
        if (i + 1 < L.nx) {
          const int n = L.center(i + 1, j, k);
          const int f[4] = {L.corner(i + 1, j, k), L.corner(i + 1, j + 1, k), L.corner(i + 1, j + 1, k + 1),
                            L.corner(i + 1, j, k + 1)};
          for (int e = 0; e < 4; ++e) emit(c, n, f[e], f[(e + 1) % 4]);
        }
        if (j + 1 < L.ny) {
          const int n = L.center(i, j + 1, k);
          const int f[4] = {L.corner(i, j + 1, k), L.corner(i + 1, j + 1, k), L.corner(i + 1, j + 1, k + 1),
                            L.corner(i, j + 1, k + 1)};
          for (int e = 0; e < 4; ++e) emit(c, n, f[e], f[(e + 1) % 4]);
        }
        if (k + 1 < L.nz) {
          const int n = L.center(i, j, k + 1);
          const int f[4] = {L.corner(i, j, k + 1), L.corner(i + 1, j, k + 1), L.corner(i + 1, j + 1, k + 1),
                            L.corner(i, j + 1, k + 1)};
          for (int e = 0; e < 4; ++e) emit(c, n, f[e], f[(e + 1) % 4]);
        }
      }
  return tets;
}

std::vector<Tet> largest_face_component(const std::vector<Tet>& tets) {
  std::vector<std::pair<std::array<int, 3>, int>> faces;
  faces.reserve(tets.size() * 4);
  for (size_t t = 0; t < tets.size(); ++t)
    for (const auto& f : kTetFaces) {
      std::array<int, 3> key = {tets[t][f[0]], tets[t][f[1]], tets[t][f[2]]};
      std::sort(key.begin(), key.end());
      faces.emplace_back(key, static_cast<int>(t));
    }
  std::sort(faces.begin(), faces.end());
  std::vector<std::vector<int>> adj(tets.size());
  for (size_t i = 0; i + 1 < faces.size(); ++i) {
    if (faces[i].first == faces[i + 1].first) {
      adj[faces[i].second].push_back(faces[i + 1].second);
      adj[faces[i + 1].second].push_back(faces[i].second);
    }
  }
  std::vector<int> comp(tets.size(), -1);
  std::vector<int> sizes;
  for (size_t s = 0; s < tets.size(); ++s) {
    if (comp[s] >= 0) continue;
    const int id = static_cast<int>(sizes.size());
    sizes.push_back(0);
    std::vector<int> stack{static_cast<int>(s)};
    comp[s] = id;
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      ++sizes[id];
      for (int n : adj[t])
        if (comp[n] < 0) {
          comp[n] = id;
          stack.push_back(n);
        }
    }
  }
  if (sizes.size() <= 1) return tets;
  const int best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<Tet> out;
  for (size_t t = 0; t < tets.size(); ++t)
    if (comp[t] == best) out.push_back(tets[t]);
  return out;
}

}  // namespace

TetMesh tetrahedralize(const SurfaceMesh& surface, double target_edge, const TetrahedralizeOptions& options) {
  if (!(target_edge > 0.0)) throw Error(ErrorCode::kInvalidArgument, "target_edge must be > 0");
  validate_indices(surface);
  if (!is_closed(surface)) throw Error(ErrorCode::kOpenSurface, "tetrahedralize requires a closed surface");
  const double surface_volume = signed_volume(surface);
  if (!(surface_volume > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "tetrahedralize requires an outward-oriented surface");

  const TriangleBvh bvh(surface);
  const Aabb box = bounding_box(surface);
  const Vec3 ext = box.extent();
  const double max_ext = ext.maxCoeff();
  const int cells = std::max(1, static_cast<int>(std::ceil(max_ext / target_edge - 1e-9)));

  // Lattice anchored at the box corner with one padding cell per side.
  Lattice L;
  L.a = max_ext / cells;
  L.origin = box.min - Vec3::Constant(L.a);
  L.nx = static_cast<int>(std::ceil(ext.x() / L.a - 1e-9)) + 2;
  L.ny = static_cast<int>(std::ceil(ext.y() / L.a - 1e-9)) + 2;
  L.nz = static_cast<int>(std::ceil(ext.z() / L.a - 1e-9)) + 2;

  // Keep tets whose centroid is inside or exactly on the surface.
  const double on_surface = 1e-10 * L.a;
  std::vector<Tet> kept;
  for (const Tet& t : bcc_tets(L)) {
    const Vec3 centroid =
        0.25 * (L.position(t[0]) + L.position(t[1]) + L.position(t[2]) + L.position(t[3]));
    if (bvh.closest(centroid).sq_distance <= on_surface * on_surface || bvh.winding_number(centroid) > 0.5)
      kept.push_back(t);
  }
  kept = largest_face_component(kept);
  if (kept.empty()) throw Error(ErrorCode::kMeshingFailure, "no lattice tets inside the surface");

  // Compact lattice vertices.
  std::vector<int> remap(L.vertex_count(), -1);
  std::vector<Vec3> rest;
  for (Tet& t : kept)
    for (int& v : t) {
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(rest.size());
        rest.push_back(L.position(v));
      }
      v = remap[v];
    }

  std::vector<char> removed(kept.size(), 0);
  std::vector<double> pull(rest.size(), 1.0);
  std::vector<Vec3> target(rest.size());
  std::vector<char> has_target(rest.size(), 0);
  std::vector<Vec3> pos = rest;
  std::vector<char> boundary(rest.size(), 0);

  auto refresh_boundary = [&]() {
    std::vector<Tet> live;
    for (size_t t = 0; t < kept.size(); ++t)
      if (!removed[t]) live.push_back(kept[t]);
    std::vector<Tri> faces;
    std::vector<int> verts;
    find_boundary(live, faces, verts, rest.size());
    std::fill(boundary.begin(), boundary.end(), 0);
    for (int v : verts) {
      boundary[v] = 1;
      if (!has_target[v]) {
        target[v] = bvh.closest(rest[v]).point;
        has_target[v] = 1;
      }
    }
  };
  auto place = [&]() {
    for (size_t v = 0; v < rest.size(); ++v)
      pos[v] = boundary[v] ? Vec3(rest[v] + pull[v] * (target[v] - rest[v])) : rest[v];
  };
  auto quality = [&](const Tet& t) { return tet_quality(pos[t[0]], pos[t[1]], pos[t[2]], pos[t[3]]); };

  refresh_boundary();
  bool clean = false;
  for (int round = 0; round <= options.max_repair_rounds && !clean; ++round) {
    place();
    bool bad = false;
    bool changed = false;
    bool any_removed = false;
    for (size_t t = 0; t < kept.size(); ++t) {
      if (removed[t] || quality(kept[t]) >= options.quality_floor) continue;
      bad = true;
      if (round == options.max_repair_rounds) break;
      int on_boundary = 0;
      for (int v : kept[t]) on_boundary += boundary[v];
      if (on_boundary == 4) {
        // A sliver lying on the surface: peel it off.
        removed[t] = 1;
        any_removed = changed = true;
        continue;
      }
      // Otherwise pull its boundary vertices partway back toward the lattice.
      for (int v : kept[t]) {
        if (boundary[v] && pull[v] > 0.25) {
          pull[v] = std::max(0.25, pull[v] - 0.25);
          changed = true;
        }
      }
    }
    clean = !bad;
    if (!changed) break;
    if (any_removed) refresh_boundary();
  }
  if (!clean) throw Error(ErrorCode::kMeshingFailure, "tet quality floor could not be met near the boundary");

  // Assemble the final mesh without unreferenced vertices.
  std::vector<Tet> live;
  for (size_t t = 0; t < kept.size(); ++t)
    if (!removed[t]) live.push_back(kept[t]);
  live = largest_face_component(live);  // peeling can split off fragments
  std::vector<Tet> final_tets;
  std::vector<int> final_remap(rest.size(), -1);
  std::vector<Vec3> final_vertices;
  for (Tet tet : live) {
    for (int& v : tet) {
      if (final_remap[v] < 0) {
        final_remap[v] = static_cast<int>(final_vertices.size());
        final_vertices.push_back(pos[v]);
      }
      v = final_remap[v];
    }
    final_tets.push_back(tet);
  }
  TetMesh mesh(std::move(final_vertices), std::move(final_tets));
  validate_tet_mesh(mesh, options.quality_floor);

  for (int v : mesh.boundary_vertices()) {
    const double d = std::sqrt(bvh.closest(mesh.vertices()[v]).sq_distance);
    if (d > 0.5 * target_edge)
      throw Error(ErrorCode::kMeshingFailure, "boundary vertex farther than target_edge/2 from the surface");
  }
  const double vol = total_volume(mesh);
  if (std::abs(vol - surface_volume) > options.volume_tolerance * surface_volume) {
    std::ostringstream os;
    os << "tet volume " << vol << " deviates from surface volume " << surface_volume;
    throw Error(ErrorCode::kMeshingFailure, os.str());
  }
  return mesh;
}

}  // namespace v2s
