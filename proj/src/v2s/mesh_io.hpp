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

#include <filesystem>

#include "v2s/surface_mesh.hpp"
#include "v2s/tet_mesh.hpp"

namespace v2s {

enum class PlyFormat { kAscii, kBinaryLittleEndian };

// Reads ASCII, binary little- and big-endian PLY. Polygons are fan
// triangulated; vertices without faces are kept (point clouds).
SurfaceMesh read_ply(const std::filesystem::path& path);
// Vertices are written as doubles so binary files round-trip exactly.
void write_ply(const SurfaceMesh& mesh, const std::filesystem::path& path,
               PlyFormat format = PlyFormat::kBinaryLittleEndian);

// ASCII tet mesh:
//   tetmesh v1
//   <vertex count>
//   <tet count>
//   x y z          (one row per vertex, meters)
//   a b c d        (one row per tet, 0-based)
TetMesh read_tetmesh(const std::filesystem::path& path);
void write_tetmesh(const TetMesh& mesh, const std::filesystem::path& path);

}  // namespace v2s
