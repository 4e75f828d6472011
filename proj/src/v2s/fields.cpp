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

#include "v2s/fields.hpp"

#include <cmath>

#include "v2s/bvh.hpp"
#include "v2s/point_cloud.hpp"

namespace v2s {

void GridSpec::validate() const {
  if (resolution < 1) throw Error(ErrorCode::kInvalidArgument, "grid resolution must be positive");
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw Error(ErrorCode::kInvalidArgument, "grid spacing must be positive");
  if (!origin.allFinite()) throw Error(ErrorCode::kInvalidArgument, "grid origin must be finite");
}

GridField::GridField(const GridSpec& spec, int channels, float fill) : spec_(spec), channels_(channels) {
  spec.validate();
  if (channels != 1 && channels != 3) throw Error(ErrorCode::kInvalidArgument, "grid fields have 1 or 3 channels");
  values_.assign(spec.point_count() * channels, fill);
}

Vec3 GridField::vector(int x, int y, int z) const {
  return {at(x, y, z, 0), at(x, y, z, 1), at(x, y, z, 2)};
}

const GridSpec& Sample::spec() const {
  for (const GridField* f : {&sdf_p, &df_i, &u})
    if (!f->empty()) return f->spec();
  throw Error(ErrorCode::kInvalidArgument, "sample holds no grids");
}

void KernelParams::validate() const {
  if (!(sigma_voxels > 0.0)) throw Error(ErrorCode::kInvalidArgument, "kernel sigma must be positive");
  if (!(truncation > 0.0)) throw Error(ErrorCode::kInvalidArgument, "kernel truncation must be positive");
}

GridSpec grid_spec_for(const SurfaceMesh& preop, const SurfaceMesh& intraop, int resolution, double padding) {
  if (preop.empty() || intraop.empty()) throw Error(ErrorCode::kInvalidArgument, "meshes must be non-empty");
  if (resolution < 2) throw Error(ErrorCode::kInvalidArgument, "grid resolution must be at least 2");
  if (!(padding >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "grid padding must be nonnegative");
  Aabb box = bounding_box(preop.vertices);
  box.extend(bounding_box(intraop.vertices));
  const Vec3 pad = padding * box.extent();
  box.min -= pad;
  box.max += pad;
  const double edge = box.extent().maxCoeff();
  if (!(edge > 0.0)) throw Error(ErrorCode::kDegenerate, "meshes span a single point");
  const Vec3 center = box.center();
  GridSpec spec;
  spec.resolution = resolution;
  spec.spacing = static_cast<float>(edge / (resolution - 1));
  const Eigen::Vector3f origin = (center - Vec3::Constant(0.5 * edge)).cast<float>();
  spec.origin = origin.cast<double>();
  return spec;
}

GridField signed_distance_grid(const SurfaceMesh& surface, const GridSpec& spec) {
  validate_indices(surface);
  if (surface.triangles.empty() || !is_closed(surface))
    throw Error(ErrorCode::kOpenSurface, "signed distance needs a closed surface");
  const TriangleBvh bvh(surface);
  GridField field(spec, 1);
  const int r = spec.resolution;
  for (int z = 0; z < r; ++z)
    for (int y = 0; y < r; ++y)
      for (int x = 0; x < r; ++x) {
        const Vec3 q = spec.point(x, y, z);
        const double d2 = bvh.closest(q).sq_distance;
        const double d = std::sqrt(d2);
        field.at(x, y, z) = static_cast<float>(bvh.inside(q, d2) ? -d : d);
      }
  return field;
}

GridField unsigned_distance_grid(const SurfaceMesh& surface, const GridSpec& spec) {
  validate_indices(surface);
  if (surface.empty()) throw Error(ErrorCode::kInvalidArgument, "surface is empty");
  TriangleBvh::Options options;
  options.include_isolated_vertices = true;
  const TriangleBvh bvh(surface, options);
  GridField field(spec, 1);
  const int r = spec.resolution;
  for (int z = 0; z < r; ++z)
    for (int y = 0; y < r; ++y)
      for (int x = 0; x < r; ++x) field.at(x, y, z) = static_cast<float>(std::sqrt(bvh.closest(spec.point(x, y, z)).sq_distance));
  return field;
}

GridField splat_displacement(const TetMesh& mesh, std::span<const Vec3> u, const GridField& sdf,
                             const KernelParams& kernel) {
  kernel.validate();
  if (u.size() != mesh.vertex_count()) throw Error(ErrorCode::kLengthMismatch, "displacement size mismatch");
  if (sdf.channels() != 1) throw Error(ErrorCode::kInvalidArgument, "interior mask must be a scalar grid");
  const GridSpec& spec = sdf.spec();
  const double sigma = kernel.sigma_voxels * spec.spacing;
  const double support = kernel.truncation * sigma;
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
  const PointGrid points(mesh.vertices(), support);

  GridField field(spec, 3);
  const int r = spec.resolution;
  for (int z = 0; z < r; ++z)
    for (int y = 0; y < r; ++y)
      for (int x = 0; x < r; ++x) {
        if (!(sdf.at(x, y, z) < 0.0f)) continue;
        const Vec3 q = spec.point(x, y, z);
        Vec3 value = Vec3::Zero();
        const std::vector<int> nbrs = points.within(q, support);
        if (nbrs.empty()) {
          value = u[points.nearest(q)];
        } else {
          double wsum = 0.0;
          Vec3 acc = Vec3::Zero();
          for (int i : nbrs) {
            const double w = std::exp(-(mesh.vertices()[i] - q).squaredNorm() * inv_two_sigma2);
            wsum += w;
            acc += w * u[i];
          }
          if (wsum > 0.0) value = acc / wsum;
          else value = u[points.nearest(q)];
        }
        for (int c = 0; c < 3; ++c) field.at(x, y, z, c) = static_cast<float>(value[c]);
      }
  return field;
}

GridField downsample(const GridField& field, int to_resolution) {
  const GridSpec& src = field.spec();
  if (to_resolution < 1 || src.resolution % to_resolution != 0)
    throw Error(ErrorCode::kDivisibility, "target resolution " + std::to_string(to_resolution) +
                                              " does not divide " + std::to_string(src.resolution));
  const int f = src.resolution / to_resolution;
  GridSpec dst;
  dst.resolution = to_resolution;
  dst.spacing = src.spacing * f;
  dst.origin = src.origin + Vec3::Constant(0.5 * (f - 1) * src.spacing);
  GridField out(dst, field.channels());
  const double inv = 1.0 / (static_cast<double>(f) * f * f);
  for (int c = 0; c < field.channels(); ++c)
    for (int z = 0; z < to_resolution; ++z)
      for (int y = 0; y < to_resolution; ++y)
        for (int x = 0; x < to_resolution; ++x) {
          double sum = 0.0;
          for (int dz = 0; dz < f; ++dz)
            for (int dy = 0; dy < f; ++dy)
              for (int dx = 0; dx < f; ++dx) sum += field.at(x * f + dx, y * f + dy, z * f + dz, c);
          out.at(x, y, z, c) = static_cast<float>(sum * inv);
        }
  return out;
}

GridField flip_field(const GridField& field, int axes, bool vector_field) {
  if (field.empty()) return field;
  GridField out(field.spec(), field.channels());
  const int r = field.spec().resolution;
  auto mirror = [&](int i, int bit) { return (axes & bit) ? r - 1 - i : i; };
  for (int c = 0; c < field.channels(); ++c) {
    const bool negate = vector_field && (axes & (1 << c));
    for (int z = 0; z < r; ++z)
      for (int y = 0; y < r; ++y)
        for (int x = 0; x < r; ++x) {
          const float v = field.at(mirror(x, 1), mirror(y, 2), mirror(z, 4), c);
          out.at(x, y, z, c) = negate ? -v : v;
        }
  }
  return out;
}

Sample flip_augment(const Sample& sample, int axes) {
  if (axes < 0 || axes > 7) throw Error(ErrorCode::kInvalidArgument, "flip axes must be a 3-bit mask");
  Sample out;
  out.sdf_p = flip_field(sample.sdf_p, axes, false);
  out.df_i = flip_field(sample.df_i, axes, false);
  out.u = flip_field(sample.u, axes, true);
  out.meta = sample.meta;
  out.meta.flip_code ^= axes;
  return out;
}

Sample voxelize(const SurfaceMesh& preop, const SurfaceMesh& intraop, const GridSpec& spec) {
  Sample s;
  s.sdf_p = signed_distance_grid(preop, spec);
  s.df_i = unsigned_distance_grid(intraop, spec);
  return s;
}

Sample voxelize(const TetMesh& preop, std::span<const Vec3> u, const SurfaceMesh& intraop, const GridSpec& spec,
                const KernelParams& kernel) {
  Sample s = voxelize(preop.boundary_surface(), intraop, spec);
  s.u = splat_displacement(preop, u, s.sdf_p, kernel);
  return s;
}

}  // namespace v2s
