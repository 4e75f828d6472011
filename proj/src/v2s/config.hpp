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

#include <string>

#include <nlohmann/json.hpp>

#include "v2s/dataset.hpp"
#include "v2s/organ.hpp"

namespace v2s {

struct PipelineConfig {
  GenParams gen;
  double tet_target_edge = 0.015;  // m
  TetrahedralizeOptions tet;
  SolverOpts solver;
  ScenarioParams scenario;
  PartialSurfaceParams partial;  // seed is replaced per sample
  AcceptanceParams acceptance;
  int grid_resolution = 64;
  double grid_padding = 0.1;
  KernelParams kernel;
  double val_fraction = 0.1;
  double marker_radius = 0.01;  // m
  double mls_radius = 0.0;      // m, 0 disables smoothing in voxelize
  bool keep_meshes = false;
  int workers = 0;  // 0 = hardware concurrency
  std::string output_root;

  // Throws kConfig naming the offending field.
  void validate() const;
};

// Every key is optional; unknown keys and wrong types throw kConfig.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::string& path);

// Full configuration.
nlohmann::json config_to_json(const PipelineConfig& config);
// The part that determines generated bytes (excludes workers and
// output_root); embedded in manifests and hashed.
nlohmann::json config_snapshot(const PipelineConfig& config);
// 16 hex digits of FNV-1a over the canonical snapshot dump.
std::string config_hash(const PipelineConfig& config);

}  // namespace v2s
