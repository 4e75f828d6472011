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

#include "v2s/point_cloud.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "v2s/rng.hpp"

namespace v2s {

size_t PointGrid::KeyHash::operator()(const Key& k) const {
  uint64_t h = splitmix64(static_cast<uint64_t>(k.x));
  h = splitmix64(h ^ static_cast<uint64_t>(k.y));
  return splitmix64(h ^ static_cast<uint64_t>(k.z));
}

PointGrid::Key PointGrid::key_of(const Vec3& p) const {
  return {static_cast<int64_t>(std::floor(p.x() / cell_)), static_cast<int64_t>(std::floor(p.y() / cell_)),
          static_cast<int64_t>(std::floor(p.z() / cell_))};
}

PointGrid::PointGrid(std::span<const Vec3> points, double cell_size) : points_(points), cell_(cell_size) {
  if (!(cell_size > 0.0)) throw Error(ErrorCode::kInvalidArgument, "cell size must be positive");
  for (size_t i = 0; i < points.size(); ++i) cells_[key_of(points[i])].push_back(static_cast<int>(i));
}

std::vector<int> PointGrid::within(const Vec3& q, double radius) const {
  std::vector<int> out;
  const Key lo = key_of(q - Vec3::Constant(radius));
  const Key hi = key_of(q + Vec3::Constant(radius));
  const double r2 = radius * radius;
  for (int64_t z = lo.z; z <= hi.z; ++z)
    for (int64_t y = lo.y; y <= hi.y; ++y)
      for (int64_t x = lo.x; x <= hi.x; ++x) {
        const auto it = cells_.find({x, y, z});
        if (it == cells_.end()) continue;
        for (int i : it->second)
          if ((points_[i] - q).squaredNorm() <= r2) out.push_back(i);
      }
  std::sort(out.begin(), out.end());
  return out;
}

int PointGrid::nearest(const Vec3& q) const {
  if (points_.empty()) return -1;
  // Grow the search shell until a hit is certain to be the nearest.
  for (double radius = cell_;; radius *= 2.0) {
    const std::vector<int> hits = within(q, radius);
    if (!hits.empty()) {
      int best = hits[0];
      double best_d = (points_[best] - q).squaredNorm();
      for (int i : hits) {
        const double d = (points_[i] - q).squaredNorm();
        if (d < best_d) best = i, best_d = d;
      }
      return best;
    }
    if (radius > 1e12 * cell_) break;
  }
  int best = 0;
  for (size_t i = 1; i < points_.size(); ++i)
    if ((points_[i] - q).squaredNorm() < (points_[best] - q).squaredNorm()) best = static_cast<int>(i);
  return best;
}

SurfaceMesh mls_smooth(const SurfaceMesh& cloud, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::kInvalidArgument, "MLS radius must be positive");
  SurfaceMesh out = cloud;
  const PointGrid grid(cloud.vertices, radius);
  const double h2 = radius * radius / 4.0;  // Gaussian width radius / 2
  for (size_t i = 0; i < cloud.vertices.size(); ++i) {
    const Vec3& p = cloud.vertices[i];
    const std::vector<int> nbrs = grid.within(p, radius);
    if (nbrs.size() < 3) continue;
    double wsum = 0.0;
    Vec3 mean = Vec3::Zero();
    for (int j : nbrs) {
      const double w = std::exp(-(cloud.vertices[j] - p).squaredNorm() / h2);
      wsum += w;
      mean += w * cloud.vertices[j];
    }
    mean /= wsum;
    Mat3 cov = Mat3::Zero();
    for (int j : nbrs) {
      const double w = std::exp(-(cloud.vertices[j] - p).squaredNorm() / h2);
      const Vec3 d = cloud.vertices[j] - mean;
      cov += w * d * d.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const Vec3 normal = eig.eigenvectors().col(0);
    out.vertices[i] = p - normal.dot(p - mean) * normal;
  }
  return out;
}

}  // namespace v2s
