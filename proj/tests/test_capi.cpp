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

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "v2s/v2s.h"

namespace fs = std::filesystem;

namespace {

struct Dir {
  fs::path path;
  explicit Dir(const char* tag) : path(fs::temp_directory_path() / (std::string("v2s_capi_") + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Dir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(V2S_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kFastConfig = R"({
  "gen": {"target_edge_length": 0.012},
  "tet": {"target_edge": 0.025},
  "grid": {"resolution": 8},
  "workers": 1
})";

}  // namespace

TEST_CASE("version and errors") {
  CHECK(std::string(v2s_version()).size() > 0);
  CHECK(std::string(v2s_status_name(V2S_ERR_CONFIG)) != "");
  v2s_sample* s = nullptr;
  CHECK(v2s_sample_read("/nonexistent/file.v2sd", &s) == V2S_ERR_IO);
  CHECK(s == nullptr);
  CHECK(std::string(v2s_last_error()).find("nonexistent") != std::string::npos);
  CHECK(v2s_sample_read(nullptr, &s) == V2S_ERR_INVALID_ARGUMENT);
  double mu = 0, lambda = 0;
  CHECK(v2s_lame_from_elastic(3000, 0.5, &mu, &lambda) == V2S_ERR_DOMAIN);
  CHECK(v2s_lame_from_elastic(2700, 0.35, &mu, &lambda) == V2S_OK);
  CHECK(mu == doctest::Approx(1000.0));
}

TEST_CASE("surface, tet mesh and solve through the C API") {
  v2s_gen_params gp;
  v2s_gen_params_default(&gp);
  gp.seed = 0;
  gp.target_edge_length = 0.012;
  v2s_surface* surf = nullptr;
  REQUIRE(v2s_surface_generate(&gp, &surf) == V2S_OK);
  int closed = 0;
  CHECK(v2s_surface_is_closed(surf, &closed) == V2S_OK);
  CHECK(closed == 1);
  const double q[6] = {0, 0, 0, 5, 5, 5};
  uint8_t inside[2];
  CHECK(v2s_surface_classify_inside(surf, q, 2, inside) == V2S_OK);
  CHECK(inside[1] == 0);

  v2s_tetmesh* mesh = nullptr;
  REQUIRE(v2s_tetrahedralize(surf, 0.025, 0.1, &mesh) == V2S_OK);
  double vol = 0;
  CHECK(v2s_tetmesh_volume(mesh, &vol) == V2S_OK);
  CHECK(vol > 0);

  v2s_scenario* sc = nullptr;
  REQUIRE(v2s_scenario_sample(2, mesh, &sc) == V2S_OK);
  CHECK(v2s_scenario_fixed_count(sc) > 0);
  const size_t loads = v2s_scenario_load_count(sc);
  CHECK(loads >= 1);
  CHECK(loads <= 3);
  double f[3];
  size_t nv = 0;
  CHECK(v2s_scenario_load(sc, 0, f, &nv) == V2S_OK);
  CHECK(std::sqrt(f[0] * f[0] + f[1] * f[1] + f[2] * f[2]) <= 1.5);
  CHECK(v2s_scenario_load(sc, 99, f, &nv) == V2S_ERR_INVALID_ARGUMENT);

  const size_t n = v2s_tetmesh_vertex_count(mesh);
  std::vector<double> u(3 * n), r(3 * n);
  REQUIRE(v2s_solve_static(mesh, sc, nullptr, u.data()) == V2S_OK);
  CHECK(v2s_residual(mesh, u.data(), sc, r.data()) == V2S_OK);
  double rmax = 0;
  for (double x : r) rmax = std::max(rmax, std::abs(x));
  CHECK(rmax <= 1e-6);

  v2s_scenario_free(sc);
  v2s_tetmesh_free(mesh);
  v2s_surface_free(surf);
}

TEST_CASE("config and pipeline through the C API") {
  Dir dir("pipe");
  v2s_config* cfg = nullptr;
  CHECK(v2s_config_parse("{\"grid\": {\"resolution\": 12}}", &cfg) == V2S_ERR_CONFIG);
  CHECK(v2s_config_parse("{\"nope\": 1}", &cfg) == V2S_ERR_CONFIG);
  REQUIRE(v2s_config_parse(kFastConfig, &cfg) == V2S_OK);
  char hash[17];
  CHECK(v2s_config_hash(cfg, hash, sizeof hash) == V2S_OK);
  CHECK(std::string(hash).size() == 16);
  CHECK(v2s_config_hash(cfg, hash, 4) == V2S_ERR_INVALID_ARGUMENT);
  v2s_set_log_level(V2S_LOG_ERROR);

  v2s_generate_result res{};
  REQUIRE(v2s_generate(cfg, 2, 0, dir.path.string().c_str(), &res) == V2S_OK);
  CHECK(res.attempted == 2);
  CHECK(res.computed == 2);
  char* summary = nullptr;
  CHECK(v2s_generate_summary_json(dir.path.string().c_str(), &summary) == V2S_OK);
  CHECK(std::string(summary).find("\"attempted\":2") != std::string::npos);
  v2s_string_free(summary);

  const std::string sample_path = dir.file("samples/sample_000000000000.v2sd");
  if (fs::exists(sample_path)) {
    v2s_sample* s = nullptr;
    REQUIRE(v2s_sample_read(sample_path.c_str(), &s) == V2S_OK);
    CHECK(v2s_sample_channel_set(s) == 1);
    int reso = 0;
    double spacing = 0, origin[3];
    CHECK(v2s_sample_geometry(s, &reso, &spacing, origin) == V2S_OK);
    CHECK(reso == 8);
    size_t count = 0;
    CHECK(v2s_sample_grid(s, V2S_GRID_U, nullptr, 0, &count) == V2S_OK);
    CHECK(count == 3u * 512u);
    std::vector<float> uvals(count);
    CHECK(v2s_sample_grid(s, V2S_GRID_U, uvals.data(), 10, &count) == V2S_ERR_INVALID_ARGUMENT);
    CHECK(v2s_sample_grid(s, V2S_GRID_U, uvals.data(), uvals.size(), &count) == V2S_OK);

    v2s_error_stats st{};
    CHECK(v2s_displacement_error(s, s, &st) == V2S_OK);
    CHECK(st.mean_error == 0.0);

    v2s_sample* flipped = nullptr;
    CHECK(v2s_sample_flip(s, 3, &flipped) == V2S_OK);
    v2s_sample* down = nullptr;
    CHECK(v2s_sample_downsample(s, 3, &down) == V2S_ERR_DIVISIBILITY);
    CHECK(v2s_sample_downsample(s, 4, &down) == V2S_OK);
    v2s_sample_free(down);
    v2s_sample_free(flipped);

    char* text = nullptr;
    CHECK(v2s_inspect(sample_path.c_str(), &text) == V2S_OK);
    CHECK(std::string(text).find("resolution: 8") != std::string::npos);
    v2s_string_free(text);

    v2s_eval_result er{};
    fs::create_directories(dir.file("pred"));
    CHECK(v2s_sample_write(s, dir.file("pred/sample_000000000000.v2sd").c_str()) == V2S_OK);
    CHECK(v2s_eval(dir.file("pred").c_str(), dir.file("manifest.jsonl").c_str(), dir.file("r.csv").c_str(), &er) ==
          V2S_OK);
    CHECK(er.scored == 1);
    v2s_sample_free(s);
  }
  v2s_config_free(cfg);
  v2s_set_log_level(V2S_LOG_INFO);
}

TEST_CASE("command line exit codes") {
  Dir dir("cli");
  {
    std::ofstream out(dir.file("fast.json"));
    out << kFastConfig;
  }
  {
    std::ofstream out(dir.file("bad.json"));
    out << R"({"grid": {"resolution": 48}})";
  }
  CHECK(run("--help") == 0);
  CHECK(run("") != 0);
  CHECK(run("generate --config " + dir.file("bad.json") + " --count 1 --out " + dir.file("d")) == 2);
  CHECK(run("generate --config " + dir.file("fast.json") + " --count 1 --res 13 --out " + dir.file("d")) == 2);
  CHECK(run("generate --bogus-flag") == 2);
  CHECK(run("inspect " + dir.file("missing.v2sd")) == 1);
  CHECK(run("-q generate --config " + dir.file("fast.json") + " --count 1 --seed 3 --out " + dir.file("d")) == 0);
  CHECK(fs::exists(dir.file("d/manifest.jsonl")));
  // Same root, different config: refuses to mix datasets.
  CHECK(run("-q generate --config " + dir.file("fast.json") + " --res 16 --count 1 --seed 3 --out " + dir.file("d")) ==
        1);
  CHECK(run("eval " + dir.file("d/samples") + " " + dir.file("d/manifest.jsonl") + " " + dir.file("r.csv")) == 0);
  CHECK(fs::exists(dir.file("r.csv")));
}
