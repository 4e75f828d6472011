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

// Slow reference implementations used only by tests. They deliberately avoid
// the library's acceleration structures and geometric kernels.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "v2s/fem.hpp"
#include "v2s/fields.hpp"
#include "v2s/surface_mesh.hpp"

namespace oracle {

using v2s::Vec3;

inline double segment_sq_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * d - p).squaredNorm();
}

// Project onto the supporting plane; if the foot lies inside (barycentric
// test) use it, else the nearest of the three edges.
inline double triangle_sq_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a);
  const double n2 = n.squaredNorm();
  if (n2 > 0.0) {
    const Vec3 foot = p - n * ((p - a).dot(n) / n2);
    const double w0 = (b - foot).cross(c - foot).dot(n);
    const double w1 = (c - foot).cross(a - foot).dot(n);
    const double w2 = (a - foot).cross(b - foot).dot(n);
    if (w0 >= 0 && w1 >= 0 && w2 >= 0) return (p - foot).squaredNorm();
  }
  return std::min({segment_sq_distance(p, a, b), segment_sq_distance(p, b, c), segment_sq_distance(p, c, a)});
}

inline double nearest_sq_distance(const v2s::SurfaceMesh& m, const Vec3& p, bool include_isolated) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> used(m.vertices.size(), false);
  for (const auto& t : m.triangles) {
    best = std::min(best, triangle_sq_distance(p, m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]));
    used[t[0]] = used[t[1]] = used[t[2]] = true;
  }
  if (include_isolated)
    for (size_t i = 0; i < m.vertices.size(); ++i)
      if (!used[i]) best = std::min(best, (m.vertices[i] - p).squaredNorm());
  return best;
}

// Parity of crossings along a fixed, generic ray direction (Moller-Trumbore).
inline bool inside_by_ray(const v2s::SurfaceMesh& m, const Vec3& p) {
  const Vec3 dir = Vec3(0.5773, 0.4123, 0.7051).normalized();
  int hits = 0;
  for (const auto& t : m.triangles) {
    const Vec3& a = m.vertices[t[0]];
    const Vec3 e1 = m.vertices[t[1]] - a;
    const Vec3 e2 = m.vertices[t[2]] - a;
    const Vec3 h = dir.cross(e2);
    const double det = e1.dot(h);
    if (std::abs(det) < 1e-300) continue;
    const Vec3 s = p - a;
    const double u = s.dot(h) / det;
    if (u < 0.0 || u > 1.0) continue;
    const Vec3 q = s.cross(e1);
    const double v = dir.dot(q) / det;
    if (v < 0.0 || u + v > 1.0) continue;
    if (e2.dot(q) / det > 0.0) ++hits;
  }
  return hits % 2 == 1;
}

inline double signed_distance(const v2s::SurfaceMesh& m, const Vec3& p) {
  const double d = std::sqrt(nearest_sq_distance(m, p, false));
  return inside_by_ray(m, p) ? -d : d;
}

// Normalized Gaussian over all mesh vertices, no spatial index.
inline Vec3 splat_at(const std::vector<Vec3>& verts, const std::vector<Vec3>& u, const Vec3& x, double sigma,
                     double support) {
  double wsum = 0.0;
  Vec3 acc = Vec3::Zero();
  for (size_t i = 0; i < verts.size(); ++i) {
    const double d2 = (verts[i] - x).squaredNorm();
    if (d2 > support * support) continue;
    const double w = std::exp(-d2 / (2.0 * sigma * sigma));
    wsum += w;
    acc += w * u[i];
  }
  if (wsum > 0.0) return acc / wsum;
  size_t best = 0;
  for (size_t i = 1; i < verts.size(); ++i)
    if ((verts[i] - x).squaredNorm() < (verts[best] - x).squaredNorm()) best = i;
  return u[best];
}

inline double block_mean(const v2s::GridField& f, int to, int x, int y, int z, int c) {
  const int k = f.spec().resolution / to;
  double s = 0.0;
  for (int dz = 0; dz < k; ++dz)
    for (int dy = 0; dy < k; ++dy)
      for (int dx = 0; dx < k; ++dx) s += f.at(x * k + dx, y * k + dy, z * k + dz, c);
  return s / (k * k * k);
}

// Central differences of the total strain energy.
inline std::vector<Vec3> energy_gradient(const std::function<double(const std::vector<Vec3>&)>& energy,
                                         std::vector<Vec3> u, double h) {
  std::vector<Vec3> g(u.size(), Vec3::Zero());
  for (size_t i = 0; i < u.size(); ++i)
    for (int a = 0; a < 3; ++a) {
      const double saved = u[i][a];
      u[i][a] = saved + h;
      const double ep = energy(u);
      u[i][a] = saved - h;
      const double em = energy(u);
      u[i][a] = saved;
      g[i][a] = (ep - em) / (2.0 * h);
    }
  return g;
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Axial stretch of a compressible neo-Hookean bar under nominal traction t
// with traction-free lateral faces: the lateral stretch s(l) zeroes P22, and
// l is found so that P11 = t.
struct UniaxialStretch {
  double axial = 1.0;
  double lateral = 1.0;
};

inline UniaxialStretch uniaxial_stretch(double mu, double lambda, double t) {
  auto lateral_for = [&](double l) {
    return bisect([&](double s) { return mu * (s - 1.0 / s) + lambda * std::log(l * s * s) / s; }, 0.2, 5.0);
  };
  const double l = bisect(
      [&](double l) {
        const double s = lateral_for(l);
        return mu * (l - 1.0 / l) + lambda * std::log(l * s * s) / l - t;
      },
      0.2, 5.0);
  return {l, lateral_for(l)};
}

}  // namespace oracle
