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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "v2s/config.hpp"
#include "v2s/eval.hpp"

namespace v2s {

// Everything produced for one seed. Later stages are empty when an earlier
// one failed; meta.upstream_failure names the failing stage.
struct SimulatedCase {
  SampleMeta meta;
  SurfaceMesh organ;
  TetMesh preop;
  Scenario scenario;
  DisplacementField u;
  PartialSurface intraop;
  std::optional<Sample> sample;  // set for accepted cases
};

// Organ, tet mesh, scenario, static solve, partial view, acceptance and, if
// accepted, voxelization. Never throws for per-sample failures.
SimulatedCase simulate_case(const PipelineConfig& config, uint64_t seed);

std::string sample_file_name(uint64_t seed);

struct GenerateSummary {
  int attempted = 0;
  int accepted = 0;
  std::map<std::string, int> discarded;
  std::vector<uint64_t> computed;  // seeds run in this invocation, ascending
  std::string manifest_path;
};

// Attempts seeds seed0 .. seed0 + count - 1 under `root`. Seeds already in
// the manifest are skipped unless an accepted sample's files are missing.
// Throws kInvalidArgument if the existing manifest was produced with a
// different configuration.
GenerateSummary cmd_generate(const PipelineConfig& config, int count, uint64_t seed0, const std::string& root);

struct VoxelizeOptions {
  int resolution = 64;
  double mls_radius = 0.0;
  std::optional<RigidTransform> transform;  // preop -> intraop
  bool prealign = false;                    // estimate transform when none is given
};

// Inference-time voxelization (sdf_p and df_i only). The preoperative input
// is a closed .ply surface or a .tet mesh; the intraoperative input a .ply
// surface or point cloud, mapped into the preoperative frame.
Sample cmd_voxelize(const PipelineConfig& config, const std::string& preop_path, const std::string& intraop_path,
                    const std::string& out_path, const VoxelizeOptions& options);

struct EvalSummary {
  std::vector<ErrorStats> stats;
  int skipped = 0;  // unreadable or unmatched predictions
  int missing = 0;  // accepted samples without a prediction
};

// Scores every prediction matching `pred_glob` (wildcards in the file name
// part) against the sample of the same stem, optionally suffixed "_pred".
EvalSummary cmd_eval(const std::string& pred_glob, const std::string& manifest_path, const std::string& out_csv);

// Header and per-channel statistics of a sample file.
std::string cmd_inspect(const std::string& path);

}  // namespace v2s
