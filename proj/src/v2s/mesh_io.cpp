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

#include "v2s/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace v2s {

namespace {

[[noreturn]] void io_fail(const std::filesystem::path& path, const std::string& what) {
  throw Error(ErrorCode::kIo, path.string() + ": " + what);
}
[[noreturn]] void format_fail(const std::filesystem::path& path, const std::string& what) {
  throw Error(ErrorCode::kFormat, path.string() + ": " + what);
}

enum class ScalarType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

bool parse_scalar_type(const std::string& s, ScalarType& t) {
  if (s == "char" || s == "int8") t = ScalarType::kInt8;
  else if (s == "uchar" || s == "uint8") t = ScalarType::kUInt8;
  else if (s == "short" || s == "int16") t = ScalarType::kInt16;
  else if (s == "ushort" || s == "uint16") t = ScalarType::kUInt16;
  else if (s == "int" || s == "int32") t = ScalarType::kInt32;
  else if (s == "uint" || s == "uint32") t = ScalarType::kUInt32;
  else if (s == "float" || s == "float32") t = ScalarType::kFloat32;
  else if (s == "double" || s == "float64") t = ScalarType::kFloat64;
  else return false;
  return true;
}

size_t scalar_size(ScalarType t) {
  switch (t) {
    case ScalarType::kInt8:
    case ScalarType::kUInt8: return 1;
    case ScalarType::kInt16:
    case ScalarType::kUInt16: return 2;
    case ScalarType::kInt32:
    case ScalarType::kUInt32:
    case ScalarType::kFloat32: return 4;
    case ScalarType::kFloat64: return 8;
  }
  return 0;
}

struct Property {
  std::string name;
  ScalarType type = ScalarType::kFloat32;
  bool is_list = false;
  ScalarType count_type = ScalarType::kUInt8;
};

struct Element {
  std::string name;
  size_t count = 0;
  std::vector<Property> props;
};

double read_binary_scalar(std::istream& in, ScalarType t, bool swap) {
  unsigned char buf[8];
  const size_t n = scalar_size(t);
  in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
  if (swap) std::reverse(buf, buf + n);
  switch (t) {
    case ScalarType::kInt8: { int8_t v; std::memcpy(&v, buf, 1); return v; }
    case ScalarType::kUInt8: { uint8_t v; std::memcpy(&v, buf, 1); return v; }
    case ScalarType::kInt16: { int16_t v; std::memcpy(&v, buf, 2); return v; }
    case ScalarType::kUInt16: { uint16_t v; std::memcpy(&v, buf, 2); return v; }
    case ScalarType::kInt32: { int32_t v; std::memcpy(&v, buf, 4); return v; }
    case ScalarType::kUInt32: { uint32_t v; std::memcpy(&v, buf, 4); return v; }
    case ScalarType::kFloat32: { float v; std::memcpy(&v, buf, 4); return v; }
    case ScalarType::kFloat64: { double v; std::memcpy(&v, buf, 8); return v; }
  }
  return 0;
}

template <typename T>
void write_le(std::ostream& out, T value) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

void append_face(SurfaceMesh& mesh, const std::vector<int>& poly, const std::filesystem::path& path) {
  if (poly.size() < 3) return;
  for (int v : poly)
    if (v < 0 || v >= static_cast<int>(mesh.vertices.size())) format_fail(path, "face index out of range");
  for (size_t k = 1; k + 1 < poly.size(); ++k) mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
}

}  // namespace

SurfaceMesh read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open for reading");
  std::string line;
  std::getline(in, line);
  if (line.rfind("ply", 0) != 0) format_fail(path, "missing ply magic");

  enum class Enc { kAscii, kLittle, kBig } enc = Enc::kAscii;
  std::vector<Element> elements;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "format") {
      std::string f;
      ls >> f;
      if (f == "ascii") enc = Enc::kAscii;
      else if (f == "binary_little_endian") enc = Enc::kLittle;
      else if (f == "binary_big_endian") enc = Enc::kBig;
      else format_fail(path, "unknown format " + f);
    } else if (tok == "element") {
      Element e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (tok == "property") {
      if (elements.empty()) format_fail(path, "property before element");
      Property p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string ct, it;
        ls >> ct >> it >> p.name;
        p.is_list = true;
        if (!parse_scalar_type(ct, p.count_type) || !parse_scalar_type(it, p.type))
          format_fail(path, "bad list property types");
      } else {
        ls >> p.name;
        if (!parse_scalar_type(type, p.type)) format_fail(path, "bad property type " + type);
      }
      elements.back().props.push_back(p);
    } else if (tok == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) format_fail(path, "unterminated header");

  SurfaceMesh mesh;
  const bool swap = (enc == Enc::kLittle) != (std::endian::native == std::endian::little);
  for (const Element& e : elements) {
    const bool is_vertex = e.name == "vertex";
    const bool is_face = e.name == "face";
    int ix = -1, iy = -1, iz = -1, iface = -1;
    for (size_t k = 0; k < e.props.size(); ++k) {
      if (e.props[k].name == "x") ix = static_cast<int>(k);
      if (e.props[k].name == "y") iy = static_cast<int>(k);
      if (e.props[k].name == "z") iz = static_cast<int>(k);
      if (e.props[k].is_list && (e.props[k].name == "vertex_indices" || e.props[k].name == "vertex_index"))
        iface = static_cast<int>(k);
    }
    if (is_vertex && (ix < 0 || iy < 0 || iz < 0)) format_fail(path, "vertex element lacks x/y/z");
    std::vector<int> poly;
    for (size_t row = 0; row < e.count; ++row) {
      Vec3 p = Vec3::Zero();
      poly.clear();
      if (enc == Enc::kAscii) {
        if (!std::getline(in, line)) format_fail(path, "unexpected end of data");
        std::istringstream ls(line);
        for (size_t k = 0; k < e.props.size(); ++k) {
          const Property& pr = e.props[k];
          if (pr.is_list) {
            size_t n = 0;
            ls >> n;
            for (size_t m = 0; m < n; ++m) {
              double v;
              ls >> v;
              if (static_cast<int>(k) == iface) poly.push_back(static_cast<int>(v));
            }
          } else {
            double v;
            ls >> v;
            if (static_cast<int>(k) == ix) p.x() = v;
            if (static_cast<int>(k) == iy) p.y() = v;
            if (static_cast<int>(k) == iz) p.z() = v;
          }
        }
        if (!ls) format_fail(path, "malformed ascii row in element " + e.name);
      } else {
        for (size_t k = 0; k < e.props.size(); ++k) {
          const Property& pr = e.props[k];
          if (pr.is_list) {
            const auto n = static_cast<size_t>(read_binary_scalar(in, pr.count_type, swap));
            for (size_t m = 0; m < n; ++m) {
              const double v = read_binary_scalar(in, pr.type, swap);
              if (static_cast<int>(k) == iface) poly.push_back(static_cast<int>(v));
            }
          } else {
            const double v = read_binary_scalar(in, pr.type, swap);
            if (static_cast<int>(k) == ix) p.x() = v;
            if (static_cast<int>(k) == iy) p.y() = v;
            if (static_cast<int>(k) == iz) p.z() = v;
          }
        }
        if (!in) format_fail(path, "truncated binary data in element " + e.name);
      }
      if (is_vertex) mesh.vertices.push_back(p);
      if (is_face) append_face(mesh, poly, path);
    }
  }
  return mesh;
}

void write_ply(const SurfaceMesh& mesh, const std::filesystem::path& path, PlyFormat format) {
  validate_indices(mesh);
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open for writing");
  out << "ply\n"
      << (format == PlyFormat::kAscii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n")
      << "element vertex " << mesh.vertices.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "element face " << mesh.triangles.size() << "\n"
      << "property list uchar int vertex_indices\n"
      << "end_header\n";
  if (format == PlyFormat::kAscii) {
    out.precision(17);
    for (const Vec3& v : mesh.vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const Tri& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  } else {
    for (const Vec3& v : mesh.vertices) {
      write_le(out, v.x());
      write_le(out, v.y());
      write_le(out, v.z());
    }
    for (const Tri& t : mesh.triangles) {
      write_le<uint8_t>(out, 3);
      for (int i : t) write_le<int32_t>(out, i);
    }
  }
  if (!out) io_fail(path, "write failed");
}

TetMesh read_tetmesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open for reading");
  std::string magic, version;
  in >> magic >> version;
  if (magic != "tetmesh" || version != "v1") format_fail(path, "expected 'tetmesh v1' header");
  long long nv = -1, nt = -1;
  in >> nv >> nt;
  if (!in || nv < 0 || nt < 0) format_fail(path, "bad counts");
  std::vector<Vec3> vertices(static_cast<size_t>(nv));
  for (auto& v : vertices) in >> v.x() >> v.y() >> v.z();
  std::vector<Tet> tets(static_cast<size_t>(nt));
  for (auto& t : tets) in >> t[0] >> t[1] >> t[2] >> t[3];
  if (!in) format_fail(path, "truncated tet mesh");
  for (const Tet& t : tets)
    for (int v : t)
      if (v < 0 || v >= nv) format_fail(path, "tet index out of range");
  return TetMesh(std::move(vertices), std::move(tets));
}

void write_tetmesh(const TetMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) io_fail(path, "cannot open for writing");
  out.precision(17);
  out << "tetmesh v1\n" << mesh.vertex_count() << "\n" << mesh.tet_count() << "\n";
  for (const Vec3& v : mesh.vertices()) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const Tet& t : mesh.tets()) out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  if (!out) io_fail(path, "write failed");
}

}  // namespace v2s
