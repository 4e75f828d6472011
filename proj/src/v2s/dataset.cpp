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

#include "v2s/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "v2s/rng.hpp"

namespace v2s {

namespace fs = std::filesystem;
using nlohmann::json;

ChannelSet channel_set_of(const Sample& s) {
  const bool sdf = !s.sdf_p.empty(), df = !s.df_i.empty(), u = !s.u.empty();
  if (sdf && df && u) return ChannelSet::kFull;
  if (sdf && df && !u) return ChannelSet::kInputs;
  if (!sdf && !df && u) return ChannelSet::kDisplacement;
  throw Error(ErrorCode::kInvalidArgument, "sample grids do not form a known channel set");
}

namespace {

constexpr size_t kHeaderSize = 4 + 4 + 4 + 4 + 12 + 1;

int channel_count(ChannelSet set) {
  switch (set) {
    case ChannelSet::kFull: return 5;
    case ChannelSet::kInputs: return 2;
    case ChannelSet::kDisplacement: return 3;
  }
  return 0;
}

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 1);
  uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(const char* p) {
  uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

void check_finite(const GridField& f, const char* name) {
  for (float v : f.values())
    if (!std::isfinite(v)) throw Error(ErrorCode::kNaN, std::string("non-finite value in ") + name);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "cannot read " + path);
  return ss.str();
}

}  // namespace

size_t sample_file_size(int resolution, ChannelSet set) {
  const size_t r = static_cast<size_t>(resolution);
  return kHeaderSize + 4 * r * r * r * channel_count(set);
}

json meta_to_json(const SampleMeta& m) {
  json j = {
      {"seed", m.seed},
      {"material",
       {{"youngs_modulus", m.material.youngs_modulus},
        {"poissons_ratio", m.material.poissons_ratio},
        {"mu", m.material.mu},
        {"lambda", m.material.lambda}}},
      {"visible_fraction", m.visible_fraction},
      {"mean_displacement", m.mean_displacement},
      {"max_displacement", m.max_displacement},
      {"accepted", m.accepted},
      {"reason", m.reason},
      {"flip_code", m.flip_code},
  };
  if (!m.upstream_failure.empty()) j["upstream_failure"] = m.upstream_failure;
  return j;
}

SampleMeta meta_from_json(const json& j) {
  try {
    SampleMeta m;
    m.seed = j.value("seed", uint64_t{0});
    if (j.contains("material")) {
      const json& mat = j.at("material");
      m.material.youngs_modulus = mat.value("youngs_modulus", 0.0);
      m.material.poissons_ratio = mat.value("poissons_ratio", 0.0);
      m.material.mu = mat.value("mu", 0.0);
      m.material.lambda = mat.value("lambda", 0.0);
    }
    m.visible_fraction = j.value("visible_fraction", 0.0);
    m.mean_displacement = j.value("mean_displacement", 0.0);
    m.max_displacement = j.value("max_displacement", 0.0);
    m.accepted = j.value("accepted", false);
    m.reason = j.value("reason", std::string());
    m.upstream_failure = j.value("upstream_failure", std::string());
    m.flip_code = j.value("flip_code", 0);
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("malformed sample metadata: ") + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot create " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename " + tmp + " to " + path + ": " + ec.message());
}

void write_sample(const Sample& s, const std::string& path) {
  const ChannelSet set = channel_set_of(s);
  const GridSpec& spec = s.spec();
  for (const GridField* f : {&s.sdf_p, &s.df_i, &s.u})
    if (!f->empty() && !(f->spec() == spec)) throw Error(ErrorCode::kSpecMismatch, "sample grids differ in spec");
  if (!s.sdf_p.empty() && s.sdf_p.channels() != 1) throw Error(ErrorCode::kInvalidArgument, "sdf_p must be scalar");
  if (!s.df_i.empty() && s.df_i.channels() != 1) throw Error(ErrorCode::kInvalidArgument, "df_i must be scalar");
  if (!s.u.empty() && s.u.channels() != 3) throw Error(ErrorCode::kInvalidArgument, "u must have 3 channels");
  check_finite(s.sdf_p, "sdf_p");
  check_finite(s.df_i, "df_i");
  check_finite(s.u, "u");

  std::string bytes;
  bytes.reserve(sample_file_size(spec.resolution, set));
  bytes.append(kSampleMagic, 4);
  put_le<uint32_t>(bytes, kSampleFormatVersion);
  put_le<uint32_t>(bytes, static_cast<uint32_t>(spec.resolution));
  put_le<float>(bytes, static_cast<float>(spec.spacing));
  for (int k = 0; k < 3; ++k) put_le<float>(bytes, static_cast<float>(spec.origin[k]));
  put_le<uint8_t>(bytes, static_cast<uint8_t>(set));
  for (const GridField* f : {&s.sdf_p, &s.df_i, &s.u})
    for (float v : f->values()) put_le<float>(bytes, v);

  write_file_atomic(path, bytes);
  write_file_atomic(path + ".json", meta_to_json(s.meta).dump(2) + "\n");
}

Sample read_sample(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < kHeaderSize) throw Error(ErrorCode::kLengthMismatch, path + ": truncated header");
  if (std::memcmp(bytes.data(), kSampleMagic, 4) != 0) throw Error(ErrorCode::kFormat, path + ": bad magic");
  const uint32_t version = get_le<uint32_t>(bytes.data() + 4);
  if (version != kSampleFormatVersion)
    throw Error(ErrorCode::kFormat, path + ": unsupported version " + std::to_string(version));
  const uint32_t resolution = get_le<uint32_t>(bytes.data() + 8);
  if (resolution == 0 || resolution > 1024) throw Error(ErrorCode::kFormat, path + ": bad resolution");
  GridSpec spec;
  spec.resolution = static_cast<int>(resolution);
  spec.spacing = get_le<float>(bytes.data() + 12);
  for (int k = 0; k < 3; ++k) spec.origin[k] = get_le<float>(bytes.data() + 16 + 4 * k);
  if (!(spec.spacing > 0.0) || !std::isfinite(spec.spacing) || !spec.origin.allFinite())
    throw Error(ErrorCode::kFormat, path + ": bad grid geometry");
  const uint8_t descriptor = static_cast<uint8_t>(bytes[28]);
  if (descriptor < 1 || descriptor > 3)
    throw Error(ErrorCode::kFormat, path + ": unknown channel set " + std::to_string(descriptor));
  const auto set = static_cast<ChannelSet>(descriptor);
  const size_t expected = sample_file_size(spec.resolution, set);
  if (bytes.size() != expected)
    throw Error(ErrorCode::kLengthMismatch, path + ": expected " + std::to_string(expected) + " bytes, found " +
                                               std::to_string(bytes.size()));

  Sample s;
  const char* p = bytes.data() + kHeaderSize;
  auto load = [&](GridField& f, int channels, const char* name) {
    f = GridField(spec, channels);
    for (float& v : f.values()) {
      v = get_le<float>(p);
      p += 4;
    }
    check_finite(f, name);
  };
  if (set != ChannelSet::kDisplacement) {
    load(s.sdf_p, 1, "sdf_p");
    load(s.df_i, 1, "df_i");
  }
  if (set != ChannelSet::kInputs) load(s.u, 3, "u");
  if (set == ChannelSet::kFull) {
    const size_t n = spec.point_count();
    for (size_t i = 0; i < n; ++i)
      if (s.sdf_p.values()[i] >= 0.0f &&
          (s.u.values()[i] != 0.0f || s.u.values()[n + i] != 0.0f || s.u.values()[2 * n + i] != 0.0f))
        throw Error(ErrorCode::kFormat, path + ": nonzero displacement outside the volume");
  }

  const std::string sidecar = path + ".json";
  if (fs::exists(sidecar)) {
    try {
      s.meta = meta_from_json(json::parse(read_file(sidecar)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, sidecar + ": " + e.what());
    }
  }
  return s;
}

const char* split_name(Split split) { return split == Split::kVal ? "val" : "train"; }

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  throw Error(ErrorCode::kFormat, "unknown split '" + name + "'");
}

Split assign_split(uint64_t seed, double val_fraction) {
  const double u = static_cast<double>(splitmix64(seed ^ 0x5b1d5b1d5b1d5b1dULL) >> 11) * 0x1.0p-53;
  return u < val_fraction ? Split::kVal : Split::kTrain;
}

std::map<std::string, int> Manifest::discard_counts() const {
  std::map<std::string, int> counts;
  for (const auto& r : records)
    if (!r.accepted) ++counts[r.reason];
  return counts;
}

int Manifest::accepted_count() const {
  return static_cast<int>(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.accepted; }));
}

json record_to_json(const ManifestRecord& r) {
  json j = {{"kind", "sample"}, {"seed", r.seed}, {"accepted", r.accepted}, {"reason", r.reason}};
  if (r.accepted) {
    j["path"] = r.path;
    j["split"] = split_name(r.split);
  }
  j["meta"] = meta_to_json(r.meta);
  return j;
}

ManifestRecord record_from_json(const json& j) {
  ManifestRecord r;
  r.seed = j.at("seed").get<uint64_t>();
  r.accepted = j.at("accepted").get<bool>();
  r.reason = j.value("reason", std::string());
  r.path = j.value("path", std::string());
  if (j.contains("split")) r.split = parse_split(j.at("split").get<std::string>());
  if (j.contains("meta")) r.meta = meta_from_json(j.at("meta"));
  return r;
}

namespace {

json header_json(const Manifest& m) {
  return {{"kind", "header"}, {"format_version", m.format_version}, {"config", m.config}, {"config_hash", m.config_hash}};
}

}  // namespace

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest " + path);
  Manifest m;
  bool header = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      continue;
    }
    const std::string kind = j.value("kind", std::string());
    try {
      if (kind == "header") {
        m.format_version = j.value("format_version", 0);
        if (m.format_version != kManifestFormatVersion)
          throw Error(ErrorCode::kFormat, path + ": unsupported manifest version");
        m.config = j.value("config", json::object());
        m.config_hash = j.value("config_hash", std::string());
        header = true;
      } else if (kind == "sample") {
        m.records.push_back(record_from_json(j));
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, path + ": malformed record: " + e.what());
    }
  }
  if (!header) throw Error(ErrorCode::kFormat, path + ": missing manifest header");
  return m;
}

void write_manifest(const Manifest& manifest, const std::string& path) {
  std::vector<const ManifestRecord*> sorted;
  for (const auto& r : manifest.records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->seed < b->seed; });
  std::string out = header_json(manifest).dump() + "\n";
  for (const ManifestRecord* r : sorted) out += record_to_json(*r).dump() + "\n";
  json summary = {{"kind", "summary"},
                  {"attempted", manifest.records.size()},
                  {"accepted", manifest.accepted_count()},
                  {"discarded", manifest.discard_counts()}};
  out += summary.dump() + "\n";
  write_file_atomic(path, out);
}

ManifestAppender::ManifestAppender(const std::string& path, const Manifest& header) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  out_.open(path, std::ios::app);
  if (!out_) throw Error(ErrorCode::kIo, "cannot open manifest " + path);
  if (fresh) {
    out_ << header_json(header).dump() << "\n";
    out_.flush();
  }
}

void ManifestAppender::append(const ManifestRecord& record) {
  const std::string line = record_to_json(record).dump() + "\n";
  std::lock_guard lock(mutex_);
  out_ << line;
  out_.flush();
  if (!out_) throw Error(ErrorCode::kIo, "manifest append failed");
}

}  // namespace v2s
