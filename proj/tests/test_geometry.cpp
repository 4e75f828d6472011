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
#include <fstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "v2s/bvh.hpp"
#include "v2s/mesh_io.hpp"
#include "v2s/organ.hpp"
#include "v2s/rng.hpp"
#include "v2s/surface_mesh.hpp"
#include "v2s/tet_mesh.hpp"

using namespace v2s;
using testing::box_surface;

TEST_CASE("rng streams are reproducible and independent") {
  Rng a(7, "scenario"), b(7, "scenario"), c(7, "partial");
  for (int i = 0; i < 10; ++i) {
    const uint64_t x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    const int k = r.uniform_int(1, 3);
    CHECK(k >= 1);
    CHECK(k <= 3);
    CHECK(std::abs(r.unit_vector().norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("box surface measures") {
  const SurfaceMesh m = box_surface(Vec3(0, 0, 0), Vec3(1, 2, 3));
  CHECK(is_closed(m));
  CHECK(is_edge_manifold(m));
  CHECK(euler_characteristic(m) == 2);
  CHECK(surface_area(m) == doctest::Approx(22.0));
  CHECK(signed_volume(m) == doctest::Approx(6.0));
  CHECK(winding_number_exact(m, Vec3(0.5, 1, 1.5)) == doctest::Approx(1.0));
  CHECK(std::abs(winding_number_exact(m, Vec3(2, 1, 1.5))) < 1e-12);

  SurfaceMesh open = m;
  open.triangles.pop_back();
  CHECK_FALSE(is_closed(open));
}

TEST_CASE("invalid indices are rejected") {
  SurfaceMesh m;
  m.vertices = {Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY()};
  m.triangles = {{0, 1, 3}};
  CHECK_THROWS_AS(validate_indices(m), Error);
}

TEST_CASE("closest point matches brute force on random organs") {
  for (uint64_t seed = 0; seed < 3; ++seed) {
    const SurfaceMesh m = gen_random_organ(testing::coarse_organ(seed));
    const TriangleBvh bvh(m);
    Rng rng(seed, "test");
    const Aabb box = bounding_box(m);
    for (int i = 0; i < 200; ++i) {
      Vec3 q;
      for (int a = 0; a < 3; ++a) q[a] = rng.uniform(box.min[a] - 0.02, box.max[a] + 0.02);
      const double want = oracle::nearest_sq_distance(m, q, false);
      const ClosestHit hit = bvh.closest(q);
      CHECK(std::abs(std::sqrt(hit.sq_distance) - std::sqrt(want)) < 1e-12);
      CHECK(std::abs((hit.point - q).squaredNorm() - hit.sq_distance) < 1e-15);
    }
  }
}

TEST_CASE("inside classification agrees with ray parity") {
  const SurfaceMesh m = gen_random_organ(testing::coarse_organ(11));
  const TriangleBvh bvh(m);
  Rng rng(11, "test");
  const Aabb box = bounding_box(m);
  std::vector<Vec3> pts;
  for (int i = 0; i < 400; ++i) {
    Vec3 q;
    for (int a = 0; a < 3; ++a) q[a] = rng.uniform(box.min[a], box.max[a]);
    // Stay away from the surface where both tests are ill-conditioned.
    if (oracle::nearest_sq_distance(m, q, false) < 1e-8) continue;
    pts.push_back(q);
  }
  const std::vector<bool> in = classify_inside(pts, m);
  int inside_count = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    const bool want = oracle::inside_by_ray(m, pts[i]);
    CHECK(in[i] == want);
    CHECK(bvh.inside(pts[i]) == want);
    CHECK(std::abs(bvh.winding_number(pts[i]) - winding_number_exact(m, pts[i])) < 0.05);
    inside_count += want;
  }
  CHECK(inside_count > 0);
}

TEST_CASE("classify_inside degrades gracefully on a small hole") {
  SurfaceMesh m = box_surface(Vec3::Zero(), Vec3::Ones());
  m.triangles.pop_back();
  const std::vector<Vec3> q = {Vec3::Constant(0.5), Vec3::Constant(2.0)};
  const std::vector<bool> in = classify_inside(q, m);
  CHECK(in[0]);
  CHECK_FALSE(in[1]);
}

TEST_CASE("generated organs satisfy the surface invariants") {
  for (uint64_t seed = 0; seed < 6; ++seed) {
    GenParams p;
    p.seed = seed;
    const SurfaceMesh m = gen_random_organ(p);
    INFO("seed " << seed);
    CHECK(is_closed(m));
    CHECK(is_edge_manifold(m));
    CHECK(euler_characteristic(m) == 2);
    CHECK(signed_volume(m) > 0.0);
    CHECK_FALSE(has_self_intersections(m));
    const Aabb box = bounding_box(m);
    CHECK(p.bbox_diagonal.contains(box.diagonal()));
    CHECK(box.center().norm() < 1e-9);
  }
}

TEST_CASE("organ generation is deterministic per seed") {
  GenParams p;
  p.seed = 42;
  const SurfaceMesh a = gen_random_organ(p);
  const SurfaceMesh b = gen_random_organ(p);
  REQUIRE(a.vertices.size() == b.vertices.size());
  CHECK(a.triangles == b.triangles);
  for (size_t i = 0; i < a.vertices.size(); ++i) CHECK(a.vertices[i] == b.vertices[i]);
  p.seed = 43;
  CHECK(gen_random_organ(p).vertices.size() != a.vertices.size());
}

TEST_CASE("invalid generation parameters") {
  GenParams p;
  p.num_blobs = {0, 2};
  CHECK_THROWS_AS(gen_random_organ(p), Error);
  p = GenParams{};
  p.blob_radius = {0.05, 0.01};
  CHECK_THROWS_AS(gen_random_organ(p), Error);
}

TEST_CASE("tet quality metric") {
  const double s = 1.0;
  const Vec3 a(s, s, s), b(s, -s, -s), c(-s, -s, s), d(-s, s, -s);
  CHECK(tet_quality(a, b, c, d) == doctest::Approx(1.0));
  CHECK(tet_quality(a, b, c, 0.5 * (a + b)) < 1e-9);
  CHECK(tet_signed_volume(Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("structured box mesh volume and boundary") {
  const TetMesh m = testing::structured_box(3, 2.0);
  CHECK(total_volume(m) == doctest::Approx(8.0));
  const SurfaceMesh b = m.boundary_surface();
  CHECK(is_closed(b));
  CHECK(surface_area(b) == doctest::Approx(24.0));
  CHECK(signed_volume(b) == doctest::Approx(8.0));
  CHECK(m.boundary_vertices().size() == 64u - 8u);
}

TEST_CASE("tetrahedralize a box") {
  const SurfaceMesh s = box_surface(Vec3::Zero(), Vec3::Ones());
  const TetMesh m = tetrahedralize(s, 0.25);
  CHECK(total_volume(m) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(min_tet_quality(m) >= 0.1);
  for (const Tet& t : m.tets())
    CHECK(tet_signed_volume(m.vertices()[t[0]], m.vertices()[t[1]], m.vertices()[t[2]], m.vertices()[t[3]]) > 0);
  CHECK(is_closed(m.boundary_surface()));
}

TEST_CASE("tetrahedralize random organs") {
  for (uint64_t seed = 0; seed < 3; ++seed) {
    GenParams p;
    p.seed = seed;
    const SurfaceMesh s = gen_random_organ(p);
    const TetMesh m = tetrahedralize(s, 0.015);
    INFO("seed " << seed);
    CHECK(std::abs(total_volume(m) - signed_volume(s)) <= 0.05 * signed_volume(s));
    CHECK(min_tet_quality(m) >= 0.1);
    const SurfaceMesh b = m.boundary_surface();
    CHECK(is_closed(b));
    CHECK(euler_characteristic(b) == 2);
    // Boundary vertices are snapped onto the surface; a few near slivers are
    // only pulled partway, never farther than half an edge.
    const TriangleBvh bvh(s);
    size_t snapped = 0;
    for (int v : m.boundary_vertices()) {
      const double d2 = bvh.closest(m.vertices()[v]).sq_distance;
      CHECK(d2 <= 0.25 * 0.015 * 0.015);
      snapped += d2 < 1e-16;
    }
    CHECK(snapped >= 0.9 * m.boundary_vertices().size());
  }
}

TEST_CASE("tetrahedralize rejects bad input") {
  SurfaceMesh open = box_surface(Vec3::Zero(), Vec3::Ones());
  open.triangles.pop_back();
  CHECK_THROWS_AS(tetrahedralize(open, 0.25), Error);
  CHECK_THROWS_AS(tetrahedralize(box_surface(Vec3::Zero(), Vec3::Ones()), -1.0), Error);
}

TEST_CASE("mesh io round trips") {
  testing::TempDir dir("io");
  const SurfaceMesh s = gen_random_organ(testing::coarse_organ(3));
  for (PlyFormat f : {PlyFormat::kAscii, PlyFormat::kBinaryLittleEndian}) {
    write_ply(s, dir.file("s.ply"), f);
    const SurfaceMesh r = read_ply(dir.file("s.ply"));
    CHECK(r.triangles == s.triangles);
    REQUIRE(r.vertices.size() == s.vertices.size());
    for (size_t i = 0; i < s.vertices.size(); ++i) CHECK((r.vertices[i] - s.vertices[i]).norm() < 1e-15);
  }
  const TetMesh t = testing::structured_box(2);
  write_tetmesh(t, dir.file("t.tet"));
  const TetMesh r = read_tetmesh(dir.file("t.tet"));
  CHECK(r.tets() == t.tets());
  CHECK(r.vertices() == t.vertices());
}

TEST_CASE("ply reader handles quads and float big-endian data") {
  testing::TempDir dir("ply");
  {
    std::ofstream out(dir.file("q.ply"), std::ios::binary);
    out << "ply\nformat binary_big_endian 1.0\ncomment hand written\nelement vertex 4\n"
           "property float x\nproperty float y\nproperty float z\nelement face 1\n"
           "property list uchar int vertex_indices\nend_header\n";
    auto put_be = [&](const void* p, size_t n) {
      const auto* b = static_cast<const unsigned char*>(p);
      for (size_t i = 0; i < n; ++i) out.put(static_cast<char>(b[n - 1 - i]));
    };
    const float xyz[4][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    for (const auto& v : xyz)
      for (float c : v) put_be(&c, 4);
    out.put(4);
    for (int i : {0, 1, 2, 3}) put_be(&i, 4);
  }
  const SurfaceMesh m = read_ply(dir.file("q.ply"));
  REQUIRE(m.vertices.size() == 4);
  CHECK(m.vertices[2] == Vec3(1, 1, 0));
  CHECK(m.triangles.size() == 2);
  CHECK(surface_area(m) == doctest::Approx(1.0));
}

TEST_CASE("io errors") {
  testing::TempDir dir("ioerr");
  CHECK_THROWS_AS(read_ply(dir.file("missing.ply")), Error);
  {
    std::ofstream out(dir.file("bad.ply"));
    out << "not a ply\n";
  }
  try {
    read_ply(dir.file("bad.ply"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFormat);
  }
}
