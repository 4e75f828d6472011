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

#include <cstdint>
#include <vector>

#include "v2s/surface_mesh.hpp"

namespace v2s {

struct GenParams {
  uint64_t seed = 0;
  Range<int> num_blobs{3, 6};
  Range<double> blob_radius{0.03, 0.055};  // m
  double target_edge_length = 0.008;       // m
  int smoothing_iterations = 10;
  Range<double> bbox_diagonal{0.10, 0.30};  // m
  double subtract_probability = 0.25;
  int max_retries = 8;

  // Throws kInvalidArgument.
  void validate() const;
};

// One term of the implicit organ field.
struct Blob {
  Vec3 center;
  double radius;
  double weight;  // +1 adds material, -1 carves
};

// Blended metaball field; the organ is {x : field(x) > 0.5}. A lone blob of
// radius r yields exactly the sphere of radius r.
double blob_field(const std::vector<Blob>& blobs, const Vec3& x);

// Closed, outward-oriented, genus-0, self-intersection-free random surface,
// centered at the origin. Pure function of params. Throws kGenerationFailure
// after params.max_retries unsuccessful attempts.
SurfaceMesh gen_random_organ(const GenParams& params);

// Zero level set of `0.5 - field` on a cubic lattice with spacing h using
// marching tetrahedra (Kuhn subdivision), oriented so normals point to
// decreasing field.
SurfaceMesh polygonize_blobs(const std::vector<Blob>& blobs, double h);

// Taubin lambda/mu smoothing with uniform weights.
void taubin_smooth(SurfaceMesh& mesh, int iterations, double lambda = 0.5, double mu = -0.53);

// True if two triangles that share no vertex intersect.
bool has_self_intersections(const SurfaceMesh& mesh);

}  // namespace v2s
