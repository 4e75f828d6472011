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

#include "v2s/scenario.hpp"

namespace v2s {

// Cubic lattice; point (x, y, z) sits at origin + (x, y, z) * spacing.
struct GridSpec {
  int resolution = 64;
  Vec3 origin = Vec3::Zero();
  double spacing = 1.0;

  Vec3 point(int x, int y, int z) const { return origin + Vec3(x, y, z) * spacing; }
  size_t point_count() const { return static_cast<size_t>(resolution) * resolution * resolution; }
  bool operator==(const GridSpec& o) const {
    return resolution == o.resolution && origin == o.origin && spacing == o.spacing;
  }
  // Throws kInvalidArgument.
  void validate() const;
};

class GridField {
 public:
  GridField() = default;
  GridField(const GridSpec& spec, int channels, float fill = 0.0f);

  const GridSpec& spec() const { return spec_; }
  int channels() const { return channels_; }
  bool empty() const { return values_.empty(); }
  std::vector<float>& values() { return values_; }
  const std::vector<float>& values() const { return values_; }

  // x fastest, then y, then z, then channel.
  size_t index(int x, int y, int z, int c = 0) const {
    const size_t r = static_cast<size_t>(spec_.resolution);
    return ((static_cast<size_t>(c) * r + z) * r + y) * r + x;
  }
  float& at(int x, int y, int z, int c = 0) { return values_[index(x, y, z, c)]; }
  float at(int x, int y, int z, int c = 0) const { return values_[index(x, y, z, c)]; }
  Vec3 vector(int x, int y, int z) const;

 private:
  GridSpec spec_;
  int channels_ = 0;
  std::vector<float> values_;
};

struct Sample {
  GridField sdf_p;  // 1 channel, negative inside the preoperative volume
  GridField df_i;   // 1 channel
  GridField u;      // 3 channels, zero outside the preoperative volume
  SampleMeta meta;

  // Spec of the first non-empty grid.
  const GridSpec& spec() const;
};

struct KernelParams {
  double sigma_voxels = 1.0;  // Gaussian bandwidth in grid spacings
  double truncation = 3.0;    // support radius in units of sigma
  void validate() const;
};

// Union bounding box of both meshes, padded by `padding` times each axis
// extent per side, then grown symmetrically into a cube. Origin and spacing
// are rounded to float so the spec survives serialization unchanged.
GridSpec grid_spec_for(const SurfaceMesh& preop, const SurfaceMesh& intraop, int resolution = 64,
                       double padding = 0.1);

// Distance to the nearest triangle, negative inside. Throws kOpenSurface.
GridField signed_distance_grid(const SurfaceMesh& surface, const GridSpec& spec);
// Distance to the nearest triangle or isolated vertex.
GridField unsigned_distance_grid(const SurfaceMesh& surface, const GridSpec& spec);

// Normalized Gaussian interpolation of per-vertex displacements at grid
// points inside the volume (sdf < 0); zero elsewhere. Interior points
// without any vertex in the kernel support take the nearest vertex's value.
GridField splat_displacement(const TetMesh& mesh, std::span<const Vec3> u, const GridField& sdf,
                             const KernelParams& kernel = {});

// Block-mean pooling; the spec keeps the physical extent of the blocks.
// Throws kDivisibility.
GridField downsample(const GridField& field, int to_resolution);

// Axis bits: 1 = X, 2 = Y, 4 = Z.
GridField flip_field(const GridField& field, int axes, bool vector_field);
Sample flip_augment(const Sample& sample, int axes);

// sdf_p and df_i at a given spec.
Sample voxelize(const SurfaceMesh& preop, const SurfaceMesh& intraop, const GridSpec& spec);
// Full training sample: sdf_p, df_i and the splatted displacement.
Sample voxelize(const TetMesh& preop, std::span<const Vec3> u, const SurfaceMesh& intraop, const GridSpec& spec,
                const KernelParams& kernel = {});

}  // namespace v2s
