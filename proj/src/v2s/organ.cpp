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

#include "v2s/organ.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "v2s/bvh.hpp"
#include "v2s/log.hpp"
#include "v2s/rng.hpp"

namespace v2s {

void GenParams::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidArgument, "GenParams: " + m); };
  if (!num_blobs.valid() || num_blobs.min < 1) fail("num_blobs range must be non-empty and >= 1");
  if (!blob_radius.valid() || blob_radius.min <= 0.0) fail("blob_radius range must be non-empty and positive");
  if (!(target_edge_length > 0.0)) fail("target_edge_length must be > 0");
  if (smoothing_iterations < 0) fail("smoothing_iterations must be >= 0");
  if (!bbox_diagonal.valid() || bbox_diagonal.min <= 0.0) fail("bbox_diagonal range must be non-empty and positive");
  if (subtract_probability < 0.0 || subtract_probability > 1.0) fail("subtract_probability must be in [0,1]");
  if (max_retries < 1) fail("max_retries must be >= 1");
}

double blob_field(const std::vector<Blob>& blobs, const Vec3& x) {
  double f = 0.0;
  for (const Blob& b : blobs) {
    const double q = (x - b.center).squaredNorm() / (b.radius * b.radius);
    f += b.weight * std::exp(-std::numbers::ln2 * q);
  }
  return f;
}

namespace {

std::vector<Blob> sample_blobs(const GenParams& p, Rng& rng) {
  const int n = rng.uniform_int(p.num_blobs.min, p.num_blobs.max);
  std::vector<Blob> blobs;
  std::vector<int> additive;
  blobs.push_back({Vec3::Zero(), rng.uniform(p.blob_radius.min, p.blob_radius.max), 1.0});
  additive.push_back(0);
  for (int k = 1; k < n; ++k) {
    const Blob parent = blobs[additive[rng.uniform_int(0, static_cast<int>(additive.size()) - 1)]];
    const Vec3 dir = rng.unit_vector();
    const bool carve = rng.bernoulli(p.subtract_probability);
    const double r = rng.uniform(p.blob_radius.min, p.blob_radius.max);
    if (carve) {
      const double dist = parent.radius * rng.uniform(1.0, 1.3);
      blobs.push_back({parent.center + dist * dir, 0.7 * r, -1.0});
    } else {
      const double dist = parent.radius * rng.uniform(0.6, 1.1);
      additive.push_back(static_cast<int>(blobs.size()));
      blobs.push_back({parent.center + dist * dir, r, 1.0});
    }
  }
  return blobs;
}

// Kuhn subdivision of the unit cube into six tetrahedra sharing the 0-7
// diagonal. Corner c has offset (c&1, (c>>1)&1, (c>>2)&1).
constexpr int kKuhn[6][4] = {
    {0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7}, {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7},
};

Vec3 corner_offset(int c) { return Vec3(c & 1, (c >> 1) & 1, (c >> 2) & 1); }

int permutation_sign(const int (&ord)[4]) {
  int inversions = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (ord[i] > ord[j]) ++inversions;
  return (inversions % 2 == 0) ? 1 : -1;
}

}  // namespace

SurfaceMesh polygonize_blobs(const std::vector<Blob>& blobs, double h) {
  int additive = 0;
  double r_max = 0.0;
  Aabb centers;
  for (const Blob& b : blobs) {
    if (b.weight > 0) {
      ++additive;
      r_max = std::max(r_max, b.radius);
      centers.extend(b.center);
    }
  }
  SurfaceMesh mesh;
  if (additive == 0) return mesh;
  // Beyond this margin the field is below 0.5 even if every blob overlapped.
  const double margin = r_max * std::sqrt(std::log2(2.0 * additive)) + 2.0 * h;
  const Vec3 lo = centers.min - Vec3::Constant(margin);
  const Vec3 ext = centers.max - centers.min + Vec3::Constant(2.0 * margin);
  const int nx = static_cast<int>(std::ceil(ext.x() / h)) + 1;
  const int ny = static_cast<int>(std::ceil(ext.y() / h)) + 1;
  const int nz = static_cast<int>(std::ceil(ext.z() / h)) + 1;
  auto node_id = [&](int i, int j, int k) { return (static_cast<int64_t>(k) * ny + j) * nx + i; };
  auto node_pos = [&](int64_t id) {
    const int i = static_cast<int>(id % nx);
    const int j = static_cast<int>((id / nx) % ny);
    const int k = static_cast<int>(id / (static_cast<int64_t>(nx) * ny));
    return Vec3(lo + h * Vec3(i, j, k));
  };

  // Signed value, negative inside; exact zeros are pushed outside.
  std::vector<double> value(static_cast<size_t>(nx) * ny * nz);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const int64_t id = node_id(i, j, k);
        double s = 0.5 - blob_field(blobs, node_pos(id));
        if (s == 0.0) s = std::numeric_limits<double>::min();
        value[id] = s;
      }

  int template_sign[6];
  for (int t = 0; t < 6; ++t) {
    Mat3 m;
    for (int c = 0; c < 3; ++c) m.col(c) = corner_offset(kKuhn[t][c + 1]) - corner_offset(kKuhn[t][0]);
    template_sign[t] = m.determinant() > 0 ? 1 : -1;
  }

  std::unordered_map<uint64_t, int> edge_vertex;
  auto cut = [&](int64_t a, int64_t b) {
    const uint64_t key = (static_cast<uint64_t>(std::min(a, b)) << 32) | static_cast<uint64_t>(std::max(a, b));
    auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    // Interpolate from the lower id so the point does not depend on which
    // tetrahedron visits the edge first.
    const int64_t u = std::min(a, b), w = std::max(a, b);
    const double t = value[u] / (value[u] - value[w]);
    const int idx = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(node_pos(u) + t * (node_pos(w) - node_pos(u)));
    edge_vertex.emplace(key, idx);
    return idx;
  };

  for (int k = 0; k + 1 < nz; ++k)
    for (int j = 0; j + 1 < ny; ++j)
      for (int i = 0; i + 1 < nx; ++i)
        for (int t = 0; t < 6; ++t) {
          int64_t g[4];
          int inside_count = 0;
          for (int c = 0; c < 4; ++c) {
            const int corner = kKuhn[t][c];
            g[c] = node_id(i + (corner & 1), j + ((corner >> 1) & 1), k + ((corner >> 2) & 1));
            if (value[g[c]] < 0) ++inside_count;
          }
          if (inside_count == 0 || inside_count == 4) continue;

          // Order local vertices so the lone (or the pair of) inside vertices
          // lead, then fix parity so (ord) is positively oriented.
          int ord[4];
          int n = 0;
          const bool lone_outside = inside_count == 3;
          for (int c = 0; c < 4; ++c)
            if ((value[g[c]] < 0) != lone_outside) ord[n++] = c;
          for (int c = 0; c < 4; ++c)
            if ((value[g[c]] < 0) == lone_outside) ord[n++] = c;
          if (template_sign[t] * permutation_sign(ord) < 0) std::swap(ord[2], ord[3]);
          const int64_t a = g[ord[0]], b = g[ord[1]], c = g[ord[2]], d = g[ord[3]];

          if (inside_count == 1) {
            mesh.triangles.push_back({cut(a, b), cut(a, c), cut(a, d)});
          } else if (inside_count == 3) {
            mesh.triangles.push_back({cut(a, b), cut(a, d), cut(a, c)});
          } else {
            const int ac = cut(a, c), ad = cut(a, d), bd = cut(b, d), bc = cut(b, c);
            mesh.triangles.push_back({ac, ad, bd});
            mesh.triangles.push_back({ac, bd, bc});
          }
        }
  return mesh;
}

void taubin_smooth(SurfaceMesh& mesh, int iterations, double lambda, double mu) {
  if (iterations <= 0) return;
  std::vector<std::vector<int>> nbr(mesh.vertices.size());
  for (const Tri& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      nbr[t[k]].push_back(t[(k + 1) % 3]);
      nbr[t[k]].push_back(t[(k + 2) % 3]);
    }
  for (auto& n : nbr) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
  std::vector<Vec3> next(mesh.vertices.size());
  auto step = [&](double factor) {
    for (size_t v = 0; v < mesh.vertices.size(); ++v) {
      if (nbr[v].empty()) {
        next[v] = mesh.vertices[v];
        continue;
      }
      Vec3 avg = Vec3::Zero();
      for (int u : nbr[v]) avg += mesh.vertices[u];
      avg /= static_cast<double>(nbr[v].size());
      next[v] = mesh.vertices[v] + factor * (avg - mesh.vertices[v]);
    }
    mesh.vertices.swap(next);
  };
  for (int it = 0; it < iterations; ++it) {
    step(lambda);
    step(mu);
  }
}

namespace {

bool segment_hits_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 dir = q - p;
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pv = dir.cross(e2);
  const double det = e1.dot(pv);
  const double scale = e1.norm() * e2.norm() * dir.norm();
  if (std::abs(det) <= 1e-14 * scale) return false;
  const double inv = 1.0 / det;
  const Vec3 tv = p - a;
  const double u = tv.dot(pv) * inv;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 qv = tv.cross(e1);
  const double v = dir.dot(qv) * inv;
  if (v < 0.0 || u + v > 1.0) return false;
  const double t = e2.dot(qv) * inv;
  return t >= 0.0 && t <= 1.0;
}

bool triangles_intersect(const SurfaceMesh& m, const Tri& s, const Tri& t) {
  const auto& V = m.vertices;
  for (int k = 0; k < 3; ++k) {
    if (segment_hits_triangle(V[s[k]], V[s[(k + 1) % 3]], V[t[0]], V[t[1]], V[t[2]])) return true;
    if (segment_hits_triangle(V[t[k]], V[t[(k + 1) % 3]], V[s[0]], V[s[1]], V[s[2]])) return true;
  }
  return false;
}

}  // namespace

bool has_self_intersections(const SurfaceMesh& mesh) {
  const TriangleBvh bvh(mesh);
  bool hit = false;
  for (size_t s = 0; s < mesh.triangles.size() && !hit; ++s) {
    const Tri& ts = mesh.triangles[s];
    Aabb box;
    for (int v : ts) box.extend(mesh.vertices[v]);
    bvh.query_overlap(box, [&](int t) {
      if (hit || t <= static_cast<int>(s)) return;
      const Tri& tt = mesh.triangles[t];
      for (int a : ts)
        for (int b : tt)
          if (a == b) return;
      if (triangles_intersect(mesh, ts, tt)) hit = true;
    });
  }
  return hit;
}

namespace {

SurfaceMesh largest_component(const SurfaceMesh& mesh) {
  int count = 0;
  const auto comp = triangle_components(mesh, count);
  if (count <= 1) return remove_unreferenced(mesh);
  std::vector<double> area(count, 0.0);
  for (size_t t = 0; t < comp.size(); ++t) area[comp[t]] += triangle_area(mesh, static_cast<int>(t));
  const int best = static_cast<int>(std::max_element(area.begin(), area.end()) - area.begin());
  std::vector<int> keep;
  for (size_t t = 0; t < comp.size(); ++t)
    if (comp[t] == best) keep.push_back(static_cast<int>(t));
  return keep_triangles(mesh, keep);
}

}  // namespace

SurfaceMesh gen_random_organ(const GenParams& params) {
  params.validate();
  std::string last_reason = "no attempt";
  for (int attempt = 0; attempt < params.max_retries; ++attempt) {
    Rng rng(params.seed, "organ", static_cast<uint64_t>(attempt));
    const auto blobs = sample_blobs(params, rng);
    SurfaceMesh mesh = largest_component(polygonize_blobs(blobs, params.target_edge_length));
    if (mesh.triangles.size() < 4) {
      last_reason = "empty level set";
      continue;
    }
    if (!is_closed(mesh) || !is_edge_manifold(mesh) || euler_characteristic(mesh) != 2) {
      last_reason = "not a closed genus-0 manifold (chi=" + std::to_string(euler_characteristic(mesh)) + ")";
      continue;
    }
    taubin_smooth(mesh, params.smoothing_iterations);

    const Aabb box = bounding_box(mesh);
    const Vec3 center = box.center();
    const double diag = box.diagonal();
    double scale = 1.0;
    if (diag < params.bbox_diagonal.min) scale = params.bbox_diagonal.min / diag;
    if (diag > params.bbox_diagonal.max) scale = params.bbox_diagonal.max / diag;
    for (Vec3& v : mesh.vertices) v = scale * (v - center);

    if (!(signed_volume(mesh) > 0.0)) {
      last_reason = "non-positive volume";
      continue;
    }
    if (has_self_intersections(mesh)) {
      last_reason = "self-intersection after smoothing";
      continue;
    }
    return mesh;
  }
  std::ostringstream os;
  os << "gen_random_organ(seed=" << params.seed << ") failed after " << params.max_retries
     << " attempts: " << last_reason;
  throw Error(ErrorCode::kGenerationFailure, os.str());
}

}  // namespace v2s
