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

#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "v2s/fields.hpp"
#include "v2s/organ.hpp"
#include "v2s/rng.hpp"

using namespace v2s;

namespace {

TetMesh mirrored_tets(const TetMesh& m, int axes) {
  std::vector<Tet> tets = m.tets();
  if (__builtin_popcount(axes) % 2 == 1)
    for (Tet& t : tets) std::swap(t[2], t[3]);
  return TetMesh(testing::mirrored(m.vertices(), axes), tets);
}

GridField random_field(const GridSpec& spec, int channels, uint64_t seed) {
  GridField f(spec, channels);
  Rng rng(seed);
  for (float& v : f.values()) v = static_cast<float>(rng.uniform(-1, 1));
  return f;
}

}  // namespace

TEST_CASE("grid spec covers both meshes with padding") {
  const SurfaceMesh a = testing::box_surface(Vec3(0, 0, 0), Vec3(1, 2, 1));
  const SurfaceMesh b = testing::box_surface(Vec3(0.5, 0.5, 0.5), Vec3(1.5, 1, 1));
  const GridSpec s = grid_spec_for(a, b, 16, 0.1);
  CHECK(s.resolution == 16);
  // Padded box is [-0.15,1.65] x [-0.2,2.2] x [-0.15,1.65]; the cube edge is 2.4.
  CHECK(s.spacing == doctest::Approx(2.4 / 15).epsilon(1e-6));
  CHECK(s.origin.y() == doctest::Approx(-0.2).epsilon(1e-6));
  CHECK(s.origin.x() == doctest::Approx(0.75 - 1.2).epsilon(1e-6));
  CHECK(static_cast<double>(static_cast<float>(s.spacing)) == s.spacing);
  CHECK(s.origin.cast<float>().cast<double>() == s.origin);
  CHECK_THROWS_AS(grid_spec_for(a, SurfaceMesh{}, 16), Error);
}

TEST_CASE("signed distance of a box") {
  const SurfaceMesh m = testing::box_surface(Vec3::Constant(-1), Vec3::Constant(1));
  const GridSpec spec = testing::symmetric_spec(9, 0.5);
  const GridField f = signed_distance_grid(m, spec);
  CHECK(f.at(4, 4, 4) == doctest::Approx(-1.0));
  CHECK(f.at(0, 4, 4) == doctest::Approx(1.0));
  CHECK(f.at(2, 4, 4) == doctest::Approx(0.0));
  CHECK(f.at(0, 0, 0) == doctest::Approx(std::sqrt(3.0)));
  SurfaceMesh open = m;
  open.triangles.pop_back();
  try {
    signed_distance_grid(open, spec);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOpenSurface);
  }
}

TEST_CASE("signed distance matches the brute-force oracle") {
  const SurfaceMesh m = gen_random_organ(testing::coarse_organ(4));
  const GridSpec spec = grid_spec_for(m, m, 16);
  const GridField f = signed_distance_grid(m, spec);
  double worst = 0.0;
  for (int z = 0; z < 16; ++z)
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x)
        worst = std::max(worst, std::abs(f.at(x, y, z) - oracle::signed_distance(m, spec.point(x, y, z))));
  CHECK(worst < 1e-6);
  // Lipschitz: neighbouring samples differ by at most one spacing.
  for (int z = 0; z < 16; ++z)
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x + 1 < 16; ++x) CHECK(std::abs(f.at(x + 1, y, z) - f.at(x, y, z)) <= spec.spacing * 1.0001);
}

TEST_CASE("unsigned distance includes isolated points") {
  SurfaceMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0.5, 0.5, 1.0)};
  m.triangles = {{0, 1, 2}};
  const GridSpec spec = testing::symmetric_spec(8, 0.25);
  const GridField f = unsigned_distance_grid(m, spec);
  for (int z = 0; z < 8; ++z)
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) {
        const double want = std::sqrt(oracle::nearest_sq_distance(m, spec.point(x, y, z), true));
        CHECK(std::abs(f.at(x, y, z) - want) < 1e-6);
        CHECK(f.at(x, y, z) >= 0.0f);
      }
  // A point in the triangle plane over its interior has zero distance.
  SurfaceMesh flat;
  flat.vertices = {Vec3(-1, -1, 0.125), Vec3(2, -1, 0.125), Vec3(-1, 2, 0.125)};
  flat.triangles = {{0, 1, 2}};
  const GridField g = unsigned_distance_grid(flat, testing::symmetric_spec(2, 0.25));
  CHECK(g.at(0, 0, 1) == 0.0f);
}

TEST_CASE("splat reproduces constant and zero fields") {
  const TetMesh mesh = tetrahedralize(gen_random_organ(testing::coarse_organ(2)), 0.02);
  const GridSpec spec = grid_spec_for(mesh.boundary_surface(), mesh.boundary_surface(), 16);
  const GridField sdf = signed_distance_grid(mesh.boundary_surface(), spec);
  const Vec3 c(0.01, -0.02, 0.003);
  const std::vector<Vec3> u(mesh.vertex_count(), c);
  const GridField f = splat_displacement(mesh, u, sdf);
  const GridField z = splat_displacement(mesh, std::vector<Vec3>(mesh.vertex_count(), Vec3::Zero()), sdf);
  int interior = 0;
  for (int zz = 0; zz < 16; ++zz)
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        if (sdf.at(x, y, zz) < 0) {
          ++interior;
          CHECK((f.vector(x, y, zz) - c).norm() < 1e-7);
        } else {
          CHECK(f.vector(x, y, zz).norm() == 0.0);
        }
        CHECK(z.vector(x, y, zz).norm() == 0.0);
      }
  CHECK(interior > 0);
  CHECK_THROWS_AS(splat_displacement(mesh, std::vector<Vec3>(3), sdf), Error);
}

TEST_CASE("splat matches the direct-sum oracle") {
  const TetMesh mesh = tetrahedralize(gen_random_organ(testing::coarse_organ(5)), 0.02);
  const GridSpec spec = grid_spec_for(mesh.boundary_surface(), mesh.boundary_surface(), 16);
  const GridField sdf = signed_distance_grid(mesh.boundary_surface(), spec);
  Rng rng(5);
  std::vector<Vec3> u(mesh.vertex_count());
  for (Vec3& x : u) x = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)) * 0.01;
  for (const KernelParams& k : {KernelParams{}, KernelParams{0.5, 2.0}}) {
    const GridField f = splat_displacement(mesh, u, sdf, k);
    const double sigma = k.sigma_voxels * spec.spacing;
    for (int z = 0; z < 16; ++z)
      for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
          if (!(sdf.at(x, y, z) < 0)) continue;
          const Vec3 want = oracle::splat_at(mesh.vertices(), u, spec.point(x, y, z), sigma, k.truncation * sigma);
          CHECK((f.vector(x, y, z) - want).norm() < 1e-8);
        }
  }
}

TEST_CASE("downsample is the block mean") {
  const GridSpec spec = testing::symmetric_spec(16, 0.125);
  const GridField f = random_field(spec, 3, 1);
  for (int to : {8, 4, 2, 1}) {
    const GridField d = downsample(f, to);
    CHECK(d.spec().resolution == to);
    CHECK(d.spec().spacing == doctest::Approx(spec.spacing * 16 / to));
    // Coarse points sit at the centres of their blocks.
    const int k = 16 / to;
    CHECK((d.spec().point(0, 0, 0) - 0.5 * (spec.point(0, 0, 0) + spec.point(k - 1, k - 1, k - 1))).norm() < 1e-12);
    for (int c = 0; c < 3; ++c)
      for (int z = 0; z < to; ++z)
        for (int y = 0; y < to; ++y)
          for (int x = 0; x < to; ++x) CHECK(std::abs(d.at(x, y, z, c) - oracle::block_mean(f, to, x, y, z, c)) < 1e-6);
  }
  const GridField ones(testing::symmetric_spec(64, 0.01), 1, 1.0f);
  const GridField d = downsample(ones, 8);
  for (float v : d.values()) CHECK(v == 1.0f);
  try {
    downsample(f, 6);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDivisibility);
  }
}

TEST_CASE("flip rules") {
  const GridSpec spec = testing::symmetric_spec(8, 0.25);
  Sample s;
  s.sdf_p = random_field(spec, 1, 2);
  s.df_i = random_field(spec, 1, 3);
  s.u = random_field(spec, 3, 4);
  const Sample id = flip_augment(s, 0);
  CHECK(id.u.values() == s.u.values());
  CHECK(id.sdf_p.values() == s.sdf_p.values());
  for (int axes = 1; axes < 8; ++axes) {
    const Sample f = flip_augment(s, axes);
    CHECK(f.meta.flip_code == axes);
    const Sample back = flip_augment(f, axes);
    CHECK(back.u.values() == s.u.values());
    CHECK(back.df_i.values() == s.df_i.values());
    CHECK(back.meta.flip_code == 0);
    const int x = 1, y = 2, z = 3;
    const int mx = (axes & 1) ? 7 - x : x, my = (axes & 2) ? 7 - y : y, mz = (axes & 4) ? 7 - z : z;
    CHECK(f.sdf_p.at(x, y, z) == s.sdf_p.at(mx, my, mz));
    for (int c = 0; c < 3; ++c) {
      const float v = s.u.at(mx, my, mz, c);
      CHECK(f.u.at(x, y, z, c) == ((axes & (1 << c)) ? -v : v));
    }
  }
  CHECK_THROWS_AS(flip_augment(s, 8), Error);
}

TEST_CASE("voxelizing a mirrored case equals flipping the voxelized case") {
  GenParams gp = testing::coarse_organ(8);
  const TetMesh mesh = tetrahedralize(gen_random_organ(gp), 0.02);
  Rng rng(8);
  std::vector<Vec3> u(mesh.vertex_count());
  for (Vec3& x : u) x = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)) * 0.005;
  SurfaceMesh intra = mesh.boundary_surface();
  intra.triangles.resize(intra.triangles.size() / 3);
  const GridSpec spec = testing::symmetric_spec(16, 1.0 / 64);
  const Sample base = voxelize(mesh, u, intra, spec);
  for (int axes = 1; axes < 8; ++axes) {
    const Sample want = flip_augment(base, axes);
    std::vector<Vec3> um = testing::mirrored(u, axes);
    const Sample got = voxelize(mirrored_tets(mesh, axes), um, testing::mirrored(intra, axes), spec);
    INFO("axes " << axes);
    CHECK(got.sdf_p.values() == want.sdf_p.values());
    CHECK(got.df_i.values() == want.df_i.values());
    CHECK(got.u.values() == want.u.values());
  }
}

TEST_CASE("field construction validates") {
  GridSpec bad;
  bad.spacing = 0.0;
  CHECK_THROWS_AS(GridField(bad, 1), Error);
  CHECK_THROWS_AS(GridField(GridSpec{}, 2), Error);
  const GridField f(testing::symmetric_spec(4, 1.0), 3);
  CHECK(f.values().size() == 4u * 4 * 4 * 3);
  CHECK(f.index(1, 2, 3, 1) == ((1u * 4 + 3) * 4 + 2) * 4 + 1);
}
