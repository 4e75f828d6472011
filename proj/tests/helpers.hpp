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

#include <filesystem>
#include <string>
#include <vector>

#include "v2s/fields.hpp"
#include "v2s/organ.hpp"
#include "v2s/rng.hpp"
#include "v2s/tet_mesh.hpp"

namespace testing {

using v2s::Vec3;

inline v2s::SurfaceMesh box_surface(const Vec3& lo, const Vec3& hi) {
  v2s::SurfaceMesh m;
  for (int c = 0; c < 8; ++c)
    m.vertices.emplace_back((c & 1) ? hi.x() : lo.x(), (c & 2) ? hi.y() : lo.y(), (c & 4) ? hi.z() : lo.z());
  m.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                 {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

// n^3 cubes, six tetrahedra each, spanning [0, size]^3.
inline v2s::TetMesh structured_box(int n, double size = 1.0) {
  std::vector<Vec3> verts;
  auto id = [n](int x, int y, int z) { return (z * (n + 1) + y) * (n + 1) + x; };
  for (int z = 0; z <= n; ++z)
    for (int y = 0; y <= n; ++y)
      for (int x = 0; x <= n; ++x) verts.emplace_back(size * (double(x) / n), size * (double(y) / n), size * (double(z) / n));
  static constexpr int kKuhn[6][4] = {{0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7},
                                      {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};
  std::vector<v2s::Tet> tets;
  for (int z = 0; z < n; ++z)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        for (const auto& k : kKuhn) {
          v2s::Tet t;
          for (int i = 0; i < 4; ++i) t[i] = id(x + (k[i] & 1), y + ((k[i] >> 1) & 1), z + ((k[i] >> 2) & 1));
          if (v2s::tet_signed_volume(verts[t[0]], verts[t[1]], verts[t[2]], verts[t[3]]) < 0) std::swap(t[2], t[3]);
          tets.push_back(t);
        }
  return v2s::TetMesh(std::move(verts), std::move(tets));
}

// Reflect through the coordinate planes selected by the 3-bit mask, keeping
// triangles outward-facing.
inline v2s::SurfaceMesh mirrored(v2s::SurfaceMesh m, int axes) {
  for (Vec3& v : m.vertices)
    for (int a = 0; a < 3; ++a)
      if (axes & (1 << a)) v[a] = -v[a];
  if (__builtin_popcount(axes) % 2 == 1)
    for (v2s::Tri& t : m.triangles) std::swap(t[1], t[2]);
  return m;
}

inline std::vector<Vec3> mirrored(std::vector<Vec3> vs, int axes) {
  for (Vec3& v : vs)
    for (int a = 0; a < 3; ++a)
      if (axes & (1 << a)) v[a] = -v[a];
  return vs;
}

// Grid centred on the origin with a power-of-two spacing, so that grid
// points are exactly symmetric under reflection.
inline v2s::GridSpec symmetric_spec(int resolution, double spacing) {
  v2s::GridSpec spec;
  spec.resolution = resolution;
  spec.spacing = spacing;
  spec.origin = Vec3::Constant(-0.5 * (resolution - 1) * spacing);
  return spec;
}

inline v2s::GenParams coarse_organ(uint64_t seed) {
  v2s::GenParams p;
  p.seed = seed;
  p.target_edge_length = 0.016;
  return p;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("v2s_test_" + tag + "_" + std::to_string(v2s::Rng(std::random_device{}()).next_u64() % 1000000007));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
