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

#include <string>
#include <vector>

#include "v2s/fields.hpp"

namespace v2s {

struct ErrorStats {
  std::string sample_id;
  size_t count = 0;  // interior grid points
  double mean_error = 0.0;
  double max_error = 0.0;
  double p50_error = 0.0;
  double p90_error = 0.0;
  double p95_error = 0.0;
  double mean_target_displacement = 0.0;
  double visible_fraction = 0.0;
};

// |u_est - u_gt| over grid points with sdf_p < 0. Throws kSpecMismatch and
// kDegenerate (no interior points).
ErrorStats displacement_error(const GridField& u_est, const GridField& u_gt, const GridField& sdf_p);

struct Marker {
  std::string label;
  Vec3 position = Vec3::Zero();
};
using MarkerSet = std::vector<Marker>;

// Moves each marker by the normalized Gaussian average (sigma = radius / 3)
// of the grid displacements within `radius`. When `mask` is given only grid
// points with mask < 0 contribute. Markers with no contributing grid point
// use trilinear interpolation. Throws kOutOfGrid and kLabelMismatch
// (duplicate labels).
MarkerSet transfer_markers(const GridField& u, const MarkerSet& markers, double radius = 0.01,
                           const GridField* mask = nullptr);

struct MarkerErrors {
  std::vector<std::pair<std::string, double>> distances;  // in `displaced` order
  double mean = 0.0;
  double max = 0.0;
};

// Throws kLabelMismatch unless both sets carry the same labels.
MarkerErrors marker_error(const MarkerSet& displaced, const MarkerSet& reference);

// x -> rotation * x + translation
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
  RigidTransform inverse() const { return {rotation.transpose(), -(rotation.transpose() * translation)}; }
};

// Mean distance from the points of `cloud` to the surface `target`.
double one_sided_distance(const SurfaceMesh& cloud, const SurfaceMesh& target);

// Transform taking the preoperative surface onto the intraoperative one:
// centroids matched, principal axes aligned, axis signs chosen to minimize
// the mean distance from the intraoperative points to the moved preoperative
// surface. Throws kDegenerate for near-flat point sets.
RigidTransform rigid_prealign(const SurfaceMesh& preop, const SurfaceMesh& intraop);

// sample_id, mean_target_displacement, visible_fraction, mean_error, max_error
void export_report(const std::vector<ErrorStats>& stats, const std::string& path);
std::vector<ErrorStats> read_report(const std::string& path);

// label,x,y,z per line; a header line starting with "label" is optional.
MarkerSet read_markers(const std::string& path);
void write_markers(const MarkerSet& markers, const std::string& path);

// 4x4 row-major matrix, whitespace separated.
RigidTransform read_transform(const std::string& path);
void write_transform(const RigidTransform& t, const std::string& path);

}  // namespace v2s
