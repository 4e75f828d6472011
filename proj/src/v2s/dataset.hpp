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
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "v2s/fields.hpp"

namespace v2s {

inline constexpr char kSampleMagic[4] = {'V', '2', 'S', 'D'};
inline constexpr uint32_t kSampleFormatVersion = 1;
inline constexpr int kManifestFormatVersion = 1;

enum class ChannelSet : uint8_t {
  kFull = 1,          // sdf_p, df_i, u
  kInputs = 2,        // sdf_p, df_i
  kDisplacement = 3,  // u
};

// Channel set implied by which grids are present. Throws kInvalidArgument.
ChannelSet channel_set_of(const Sample& sample);
size_t sample_file_size(int resolution, ChannelSet set);

nlohmann::json meta_to_json(const SampleMeta& meta);
SampleMeta meta_from_json(const nlohmann::json& j);

// Binary grids at `path`, metadata at `path + ".json"`. Both are written to a
// temporary name first and renamed into place.
void write_sample(const Sample& sample, const std::string& path);
// Validates header, length, finiteness and that u vanishes outside the
// volume. Reads the sidecar when present.
Sample read_sample(const std::string& path);

enum class Split { kTrain, kVal };
const char* split_name(Split split);
Split parse_split(const std::string& name);
// Deterministic in the seed; the validation share tends to val_fraction.
Split assign_split(uint64_t seed, double val_fraction = 0.1);

struct ManifestRecord {
  uint64_t seed = 0;
  bool accepted = false;
  std::string reason;  // discard reason, empty when accepted
  std::string path;    // relative to the dataset root, empty when discarded
  Split split = Split::kTrain;
  SampleMeta meta;
};

struct Manifest {
  int format_version = kManifestFormatVersion;
  nlohmann::json config;
  std::string config_hash;
  std::vector<ManifestRecord> records;

  std::map<std::string, int> discard_counts() const;
  int accepted_count() const;
};

nlohmann::json record_to_json(const ManifestRecord& r);
ManifestRecord record_from_json(const nlohmann::json& j);

// JSON lines: a header, one record per attempted seed, and a summary with
// per-reason discard counts. Lines that fail to parse (a torn final append)
// are skipped.
Manifest read_manifest(const std::string& path);
// Rewrites the whole manifest with records sorted by seed.
void write_manifest(const Manifest& manifest, const std::string& path);

// Serialized appends to a manifest being generated.
class ManifestAppender {
 public:
  // Writes the header when the file is new or empty.
  ManifestAppender(const std::string& path, const Manifest& header);
  void append(const ManifestRecord& record);

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

// Writes `bytes` to `path` via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& bytes);

}  // namespace v2s
