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

#include "v2s/eval.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "v2s/bvh.hpp"

namespace v2s {

namespace {

// Linear interpolation between closest ranks of sorted values.
double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void check_unique_labels(const MarkerSet& markers) {
  std::set<std::string> seen;
  for (const Marker& m : markers)
    if (!seen.insert(m.label).second) throw Error(ErrorCode::kLabelMismatch, "duplicate marker label " + m.label);
}

}  // namespace

ErrorStats displacement_error(const GridField& u_est, const GridField& u_gt, const GridField& sdf_p) {
  if (u_est.channels() != 3 || u_gt.channels() != 3 || sdf_p.channels() != 1)
    throw Error(ErrorCode::kSpecMismatch, "expected two displacement grids and one scalar grid");
  if (!(u_est.spec() == u_gt.spec()) || !(u_gt.spec() == sdf_p.spec()))
    throw Error(ErrorCode::kSpecMismatch, "grid specs differ");
  const size_t n = sdf_p.spec().point_count();
  const auto& est = u_est.values();
  const auto& gt = u_gt.values();
  std::vector<double> errors;
  double target_sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (!(sdf_p.values()[i] < 0.0f)) continue;
    const Vec3 e(est[i], est[n + i], est[2 * n + i]);
    const Vec3 g(gt[i], gt[n + i], gt[2 * n + i]);
    errors.push_back((e - g).norm());
    target_sum += g.norm();
  }
  if (errors.empty()) throw Error(ErrorCode::kDegenerate, "no interior grid points");
  ErrorStats s;
  s.count = errors.size();
  double sum = 0.0;
  for (double e : errors) sum += e;
  s.mean_error = sum / static_cast<double>(errors.size());
  s.mean_target_displacement = target_sum / static_cast<double>(errors.size());
  std::sort(errors.begin(), errors.end());
  s.max_error = errors.back();
  s.p50_error = percentile(errors, 0.50);
  s.p90_error = percentile(errors, 0.90);
  s.p95_error = percentile(errors, 0.95);
  return s;
}

MarkerSet transfer_markers(const GridField& u, const MarkerSet& markers, double radius, const GridField* mask) {
  if (u.channels() != 3) throw Error(ErrorCode::kInvalidArgument, "marker transfer needs a displacement grid");
  if (!(radius > 0.0)) throw Error(ErrorCode::kInvalidArgument, "marker radius must be positive");
  if (mask && (!(mask->spec() == u.spec()) || mask->channels() != 1))
    throw Error(ErrorCode::kSpecMismatch, "marker mask does not match the displacement grid");
  check_unique_labels(markers);
  const GridSpec& spec = u.spec();
  const int r = spec.resolution;
  const double h = spec.spacing;
  const double sigma = radius / 3.0;
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);

  MarkerSet out = markers;
  for (Marker& m : out) {
    const Vec3 g = (m.position - spec.origin) / h;  // grid coordinates
    for (int k = 0; k < 3; ++k)
      if (!(g[k] >= 0.0 && g[k] <= r - 1))
        throw Error(ErrorCode::kOutOfGrid, "marker " + m.label + " lies outside the grid");
    int lo[3], hi[3];
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::max(0, static_cast<int>(std::ceil(g[k] - radius / h)));
      hi[k] = std::min(r - 1, static_cast<int>(std::floor(g[k] + radius / h)));
    }
    double wsum = 0.0;
    Vec3 acc = Vec3::Zero();
    for (int z = lo[2]; z <= hi[2]; ++z)
      for (int y = lo[1]; y <= hi[1]; ++y)
        for (int x = lo[0]; x <= hi[0]; ++x) {
          const double d2 = (spec.point(x, y, z) - m.position).squaredNorm();
          if (d2 > radius * radius) continue;
          if (mask && !(mask->at(x, y, z) < 0.0f)) continue;
          const double w = std::exp(-d2 * inv_two_sigma2);
          wsum += w;
          acc += w * u.vector(x, y, z);
        }
    Vec3 d;
    if (wsum > 0.0) {
      d = acc / wsum;
    } else {
      int i0[3];
      double t[3];
      for (int k = 0; k < 3; ++k) {
        i0[k] = std::min(static_cast<int>(std::floor(g[k])), std::max(r - 2, 0));
        t[k] = r > 1 ? g[k] - i0[k] : 0.0;
      }
      d = Vec3::Zero();
      for (int c = 0; c < 8; ++c) {
        const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
        const double w = (dx ? t[0] : 1 - t[0]) * (dy ? t[1] : 1 - t[1]) * (dz ? t[2] : 1 - t[2]);
        if (w == 0.0) continue;
        d += w * u.vector(std::min(i0[0] + dx, r - 1), std::min(i0[1] + dy, r - 1), std::min(i0[2] + dz, r - 1));
      }
    }
    m.position += d;
  }
  return out;
}

MarkerErrors marker_error(const MarkerSet& displaced, const MarkerSet& reference) {
  check_unique_labels(displaced);
  check_unique_labels(reference);
  if (displaced.size() != reference.size()) throw Error(ErrorCode::kLabelMismatch, "marker sets differ in size");
  MarkerErrors out;
  for (const Marker& m : displaced) {
    const auto it = std::find_if(reference.begin(), reference.end(), [&](const Marker& r) { return r.label == m.label; });
    if (it == reference.end()) throw Error(ErrorCode::kLabelMismatch, "no reference marker " + m.label);
    const double d = (m.position - it->position).norm();
    out.distances.emplace_back(m.label, d);
    out.mean += d;
    out.max = std::max(out.max, d);
  }
  if (!out.distances.empty()) out.mean /= static_cast<double>(out.distances.size());
  return out;
}

double one_sided_distance(const SurfaceMesh& cloud, const SurfaceMesh& target) {
  if (cloud.empty() || target.empty()) throw Error(ErrorCode::kInvalidArgument, "empty point set");
  TriangleBvh::Options options;
  options.include_isolated_vertices = true;
  const TriangleBvh bvh(target, options);
  double sum = 0.0;
  for (const Vec3& p : cloud.vertices) sum += std::sqrt(bvh.closest(p).sq_distance);
  return sum / static_cast<double>(cloud.vertices.size());
}

namespace {

struct Frame {
  Vec3 centroid;
  Mat3 axes;  // columns by ascending variance
};

Frame principal_frame(const SurfaceMesh& m, const char* name) {
  if (m.vertices.size() < 3) throw Error(ErrorCode::kDegenerate, std::string(name) + " has too few points");
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : m.vertices) c += p;
  c /= static_cast<double>(m.vertices.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : m.vertices) cov += (p - c) * (p - c).transpose();
  cov /= static_cast<double>(m.vertices.size());
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 ev = eig.eigenvalues();
  if (!(ev[2] > 0.0) || ev[0] < 1e-6 * ev[2])
    throw Error(ErrorCode::kDegenerate, std::string(name) + " is too flat for principal-axis alignment");
  Mat3 axes = eig.eigenvectors();
  if (axes.determinant() < 0.0) axes.col(2) = -axes.col(2);
  return {c, axes};
}

}  // namespace

RigidTransform rigid_prealign(const SurfaceMesh& preop, const SurfaceMesh& intraop) {
  if (preop.empty() || intraop.empty()) throw Error(ErrorCode::kInvalidArgument, "empty surface");
  const Frame fp = principal_frame(preop, "preoperative surface");
  const Frame fi = principal_frame(intraop, "intraoperative surface");

  TriangleBvh::Options options;
  options.include_isolated_vertices = true;
  const TriangleBvh bvh(preop, options);
  RigidTransform best;
  double best_cost = std::numeric_limits<double>::infinity();
  constexpr double kSigns[4][3] = {{1, 1, 1}, {-1, -1, 1}, {-1, 1, -1}, {1, -1, -1}};
  for (const auto& s : kSigns) {
    RigidTransform t;
    t.rotation = fi.axes * Vec3(s[0], s[1], s[2]).asDiagonal() * fp.axes.transpose();
    t.translation = fi.centroid - t.rotation * fp.centroid;
    const RigidTransform back = t.inverse();
    double cost = 0.0;
    for (const Vec3& p : intraop.vertices) cost += std::sqrt(bvh.closest(back.apply(p)).sq_distance);
    if (cost < best_cost) {
      best_cost = cost;
      best = t;
    }
  }
  return best;
}

void export_report(const std::vector<ErrorStats>& stats, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot create " + path);
  out << "sample_id,mean_target_displacement,visible_fraction,mean_error,max_error\n";
  char buf[256];
  for (const ErrorStats& s : stats) {
    std::snprintf(buf, sizeof buf, ",%.9g,%.9g,%.9g,%.9g\n", s.mean_target_displacement, s.visible_fraction,
                  s.mean_error, s.max_error);
    out << s.sample_id << buf;
  }
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

double parse_double(const std::string& s, const std::string& path) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kFormat, path + ": bad number '" + s + "'");
  }
}

}  // namespace

std::vector<ErrorStats> read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<ErrorStats> stats;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 5) throw Error(ErrorCode::kFormat, path + ": expected 5 columns");
    ErrorStats s;
    s.sample_id = cells[0];
    s.mean_target_displacement = parse_double(cells[1], path);
    s.visible_fraction = parse_double(cells[2], path);
    s.mean_error = parse_double(cells[3], path);
    s.max_error = parse_double(cells[4], path);
    stats.push_back(s);
  }
  return stats;
}

MarkerSet read_markers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  MarkerSet markers;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw Error(ErrorCode::kFormat, path + ": expected label,x,y,z");
    if (markers.empty() && cells[0] == "label") continue;
    markers.push_back({cells[0], Vec3(parse_double(cells[1], path), parse_double(cells[2], path),
                                      parse_double(cells[3], path))});
  }
  check_unique_labels(markers);
  return markers;
}

void write_markers(const MarkerSet& markers, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot create " + path);
  out << "label,x,y,z\n";
  char buf[128];
  for (const Marker& m : markers) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g\n", m.position.x(), m.position.y(), m.position.z());
    out << m.label << buf;
  }
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
}

RigidTransform read_transform(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  double m[16];
  for (double& v : m)
    if (!(in >> v)) throw Error(ErrorCode::kFormat, path + ": expected 16 numbers");
  if (m[12] != 0.0 || m[13] != 0.0 || m[14] != 0.0 || m[15] != 1.0)
    throw Error(ErrorCode::kFormat, path + ": last row must be 0 0 0 1");
  RigidTransform t;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) t.rotation(i, j) = m[4 * i + j];
    t.translation[i] = m[4 * i + 3];
  }
  return t;
}

void write_transform(const RigidTransform& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot create " + path);
  char buf[64];
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double v = i < 3 ? (j < 3 ? t.rotation(i, j) : t.translation[i]) : (j == 3 ? 1.0 : 0.0);
      std::snprintf(buf, sizeof buf, "%s%.17g", j ? " " : "", v);
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
}

}  // namespace v2s
