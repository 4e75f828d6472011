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
#include <unordered_map>
#include <vector>

#include "v2s/surface_mesh.hpp"

namespace v2s {

// Uniform hash grid over a fixed point set for radius queries.
class PointGrid {
 public:
  PointGrid(std::span<const Vec3> points, double cell_size);

  // Indices of points within `radius` of q (inclusive), ascending.
  std::vector<int> within(const Vec3& q, double radius) const;
  // Index of the nearest point, or -1 for an empty set.
  int nearest(const Vec3& q) const;

 private:
  struct Key {
    int64_t x, y, z;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    size_t operator()(const Key& k) const;
  };
  Key key_of(const Vec3& p) const;

  std::span<const Vec3> points_;
  double cell_;
  std::unordered_map<Key, std::vector<int>, KeyHash> cells_;
};

// Moving-least-squares smoothing: each vertex is projected onto the plane
// fitted to its Gaussian-weighted neighborhood of the given radius.
// Connectivity is unchanged; vertices with fewer than three neighbors stay.
SurfaceMesh mls_smooth(const SurfaceMesh& cloud, double radius);

}  // namespace v2s
