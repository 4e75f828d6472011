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

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "v2s/log.hpp"
#include "v2s/mesh_io.hpp"
#include "v2s/pipeline.hpp"
#include "v2s/point_cloud.hpp"

using namespace v2s;
namespace fs = std::filesystem;

namespace {

PipelineConfig fast_config() {
  PipelineConfig c;
  c.gen.target_edge_length = 0.012;
  c.tet_target_edge = 0.025;
  c.grid_resolution = 16;
  c.workers = 1;
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

struct QuietLogs {
  QuietLogs() { set_log_level(LogLevel::kError); }
  ~QuietLogs() { set_log_level(LogLevel::kInfo); }
};

}  // namespace

TEST_CASE("config parsing") {
  const PipelineConfig d;
  const PipelineConfig same = config_from_json(config_to_json(d));
  CHECK(config_hash(same) == config_hash(d));
  CHECK(config_hash(d).size() == 16);

  const PipelineConfig c = config_from_json(nlohmann::json::parse(R"({
    "grid": {"resolution": 32, "padding": 0.2},
    "gen": {"num_blobs": [2, 4]},
    "partial": {"visible_fraction": [0.2, 0.5]},
    "workers": 3
  })"));
  CHECK(c.grid_resolution == 32);
  CHECK(c.grid_padding == 0.2);
  CHECK(c.gen.num_blobs.min == 2);
  CHECK(c.gen.num_blobs.max == 4);
  CHECK(c.partial.visible_fraction.min == 0.2);
  CHECK(c.workers == 3);
  CHECK(c.tet_target_edge == d.tet_target_edge);

  CHECK(code_of([] { config_from_json(nlohmann::json::parse(R"({"grid": {"resolutoin": 32}})")); }) ==
        ErrorCode::kConfig);
  CHECK(code_of([] { config_from_json(nlohmann::json::parse(R"({"grid": {"resolution": "big"}})")); }) ==
        ErrorCode::kConfig);
  CHECK(code_of([] { config_from_json(nlohmann::json::parse(R"({"gen": {"num_blobs": [1]}})")); }) ==
        ErrorCode::kConfig);
}

TEST_CASE("config validation") {
  PipelineConfig c;
  CHECK_NOTHROW(c.validate());
  c.grid_resolution = 48;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::kConfig);
  c = PipelineConfig{};
  c.partial.visible_fraction = {0.05, 0.6};
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::kConfig);
  c = PipelineConfig{};
  c.gen.bbox_diagonal = {0.3, 0.1};
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::kConfig);
}

TEST_CASE("config hash covers the data-defining fields only") {
  PipelineConfig a, b;
  b.workers = 7;
  b.output_root = "/elsewhere";
  CHECK(config_hash(a) == config_hash(b));
  b.grid_resolution = 32;
  CHECK(config_hash(a) != config_hash(b));
  CHECK_FALSE(config_snapshot(a).contains("workers"));
}

TEST_CASE("config file loading") {
  testing::TempDir dir("cfg");
  {
    std::ofstream out(dir.file("c.json"));
    out << "{\n  // comment\n  \"grid\": {\"resolution\": 8}\n}\n";
  }
  CHECK(load_config(dir.file("c.json")).grid_resolution == 8);
  {
    std::ofstream out(dir.file("bad.json"));
    out << "{ grid: ";
  }
  CHECK(code_of([&] { load_config(dir.file("bad.json")); }) == ErrorCode::kConfig);
  CHECK(code_of([&] { load_config(dir.file("none.json")); }) == ErrorCode::kIo);
}

TEST_CASE("simulate_case is deterministic and consistent") {
  const PipelineConfig c = fast_config();
  const SimulatedCase a = simulate_case(c, 4);
  const SimulatedCase b = simulate_case(c, 4);
  REQUIRE(a.meta.accepted);
  REQUIRE(a.sample);
  CHECK(a.u == b.u);
  CHECK(a.sample->u.values() == b.sample->u.values());
  CHECK(a.sample->df_i.values() == b.sample->df_i.values());
  CHECK(a.sample->spec().resolution == 16);
  CHECK(a.meta.max_displacement >= a.meta.mean_displacement);
  CHECK(a.meta.material.youngs_modulus >= 2000.0);
  CHECK(a.sample->meta.seed == 4);
}

TEST_CASE("generate, resume and evaluate") {
  QuietLogs quiet;
  testing::TempDir dir("gen");
  PipelineConfig c = fast_config();
  c.keep_meshes = true;
  const GenerateSummary s = cmd_generate(c, 4, 10, dir.str());
  CHECK(s.attempted == 4);
  CHECK(s.computed.size() == 4);
  int discarded = 0;
  for (const auto& [reason, n] : s.discarded) discarded += n;
  CHECK(s.accepted + discarded == 4);

  const Manifest m = read_manifest(s.manifest_path);
  CHECK(m.config_hash == config_hash(c));
  REQUIRE(m.records.size() == 4);
  std::vector<std::string> samples;
  for (const ManifestRecord& r : m.records) {
    CHECK(r.seed >= 10);
    if (!r.accepted) continue;
    const std::string path = dir.str() + "/" + r.path;
    CHECK(fs::file_size(path) == sample_file_size(16, ChannelSet::kFull));
    CHECK(r.split == assign_split(r.seed, c.val_fraction));
    samples.push_back(path);
  }
  REQUIRE(!samples.empty());
  const std::string first_bytes = slurp(samples[0]);

  SUBCASE("rerun recomputes nothing") {
    const std::string manifest_bytes = slurp(s.manifest_path);
    const GenerateSummary again = cmd_generate(c, 4, 10, dir.str());
    CHECK(again.computed.empty());
    CHECK(slurp(s.manifest_path) == manifest_bytes);
  }
  SUBCASE("deleted samples are recomputed bit-identically") {
    const std::string manifest_bytes = slurp(s.manifest_path);
    fs::remove(samples[0]);
    const GenerateSummary again = cmd_generate(c, 4, 10, dir.str());
    CHECK(again.computed.size() == 1);
    CHECK(slurp(samples[0]) == first_bytes);
    CHECK(slurp(s.manifest_path) == manifest_bytes);
  }
  SUBCASE("a different config refuses to resume") {
    PipelineConfig other = c;
    other.grid_resolution = 8;
    CHECK(code_of([&] { cmd_generate(other, 4, 10, dir.str()); }) == ErrorCode::kInvalidArgument);
  }
  SUBCASE("voxelize reproduces the generated inputs") {
    const Sample gen = read_sample(samples[0]);
    const std::string stem = fs::path(samples[0]).stem().string();
    const std::string base = dir.str() + "/meshes/" + stem;
    VoxelizeOptions o;
    o.resolution = 16;
    const Sample v = cmd_voxelize(c, base + "_preop.tet", base + "_intraop.ply", dir.file("v.v2sd"), o);
    CHECK(v.spec() == gen.spec());
    CHECK(v.sdf_p.values() == gen.sdf_p.values());
    CHECK(v.df_i.values() == gen.df_i.values());
    CHECK(channel_set_of(read_sample(dir.file("v.v2sd"))) == ChannelSet::kInputs);
    // A closed PLY preop gives the same signed distances.
    const Sample vp = cmd_voxelize(c, base + "_preop.ply", base + "_intraop.ply", dir.file("w.v2sd"), o);
    CHECK(vp.sdf_p.values() == gen.sdf_p.values());
    CHECK(code_of([&] {
            cmd_voxelize(c, base + "_intraop.ply", base + "_intraop.ply", dir.file("x.v2sd"), o);
          }) == ErrorCode::kOpenSurface);
  }
  SUBCASE("eval scores identity, zero and malformed predictions") {
    fs::create_directories(dir.file("pred"));
    for (const std::string& p : samples) {
      Sample gt = read_sample(p);
      Sample pred;
      pred.u = gt.u;
      write_sample(pred, dir.file("pred/" + fs::path(p).stem().string() + "_pred.v2sd"));
    }
    {
      std::ofstream junk(dir.file("pred/sample_000000000099.v2sd"));
      junk << "junk";
    }
    const EvalSummary e = cmd_eval(dir.file("pred"), s.manifest_path, dir.file("report.csv"));
    CHECK(e.stats.size() == samples.size());
    CHECK(e.skipped == 1);
    CHECK(e.missing == 0);
    for (const ErrorStats& st : e.stats) CHECK(st.mean_error == 0.0);
    CHECK(read_report(dir.file("report.csv")).size() == samples.size());

    Sample zero;
    zero.u = GridField(read_sample(samples[0]).spec(), 3);
    fs::remove_all(dir.file("pred"));
    fs::create_directories(dir.file("pred"));
    write_sample(zero, dir.file("pred/" + fs::path(samples[0]).filename().string()));
    const EvalSummary z = cmd_eval(dir.file("pred/*.v2sd"), s.manifest_path, dir.file("report.csv"));
    REQUIRE(z.stats.size() == 1);
    CHECK(z.missing == static_cast<int>(samples.size()) - 1);
    CHECK(z.stats[0].mean_error == doctest::Approx(z.stats[0].mean_target_displacement).epsilon(1e-9));
  }
  SUBCASE("inspect") {
    const std::string text = cmd_inspect(samples[0]);
    CHECK(text.find("resolution: 16") != std::string::npos);
    CHECK(text.find("channel_set: 1") != std::string::npos);
    CHECK(text.find("u[z]") != std::string::npos);
    CHECK(text.find("\"seed\"") != std::string::npos);
  }
}

TEST_CASE("mls smoothing reduces jitter") {
  SurfaceMesh cloud;
  Rng rng(3);
  for (int i = 0; i < 2000; ++i)
    cloud.vertices.emplace_back(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), rng.uniform(-0.001, 0.001));
  const SurfaceMesh s = mls_smooth(cloud, 0.01);
  REQUIRE(s.vertices.size() == cloud.vertices.size());
  double before = 0, after = 0;
  for (size_t i = 0; i < s.vertices.size(); ++i) {
    before += std::abs(cloud.vertices[i].z());
    after += std::abs(s.vertices[i].z());
  }
  CHECK(after < 0.25 * before);
}
