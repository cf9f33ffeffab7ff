/*
 Copyright 2026 The defcap Authors.

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "defcap/defcap.h"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Context {
    defcap_context* ctx = nullptr;
    Context() { REQUIRE(defcap_context_create(&ctx) == DEFCAP_OK); }
    ~Context() { defcap_context_destroy(ctx); }
};

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "defcap_capi_tests";
    fs::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("version and status names") {
    CHECK(std::string(defcap_version()).size() > 0);
    CHECK(std::string(defcap_status_name(DEFCAP_OK)) == "ok");
    CHECK(std::string(defcap_status_name(DEFCAP_ERR_VALIDATION)) == "validation");
    CHECK(std::string(defcap_status_name(DEFCAP_ERR_NOT_FOUND)) == "not_found");
    CHECK(std::string(defcap_status_name(static_cast<defcap_status>(99))) == "unknown");
}

TEST_CASE("subcommand list") {
    std::vector<std::string> names;
    for (size_t i = 0; i < defcap_subcommand_count(); ++i) names.push_back(defcap_subcommand_name(i));
    CHECK(names == std::vector<std::string>{"gen-data", "fit", "eval", "stiffness", "simulate", "inspect"});
    CHECK(defcap_subcommand_name(names.size()) == nullptr);
}

TEST_CASE("f_score through the C API") {
    Context c;
    double f = 0.0;
    REQUIRE(defcap_f_score(c.ctx, 83.6, 96.6, &f) == DEFCAP_OK);
    CHECK(f == doctest::Approx(2 * 83.6 * 96.6 / (83.6 + 96.6)).epsilon(1e-15));
    CHECK(defcap_f_score(c.ctx, 1.0, 2.0, nullptr) == DEFCAP_ERR_INVALID_ARGUMENT);
    CHECK(std::string(defcap_last_error(c.ctx)).size() > 0);
    REQUIRE(defcap_f_score(c.ctx, 50.0, 50.0, &f) == DEFCAP_OK);
    CHECK(std::string(defcap_last_error(c.ctx)).empty());
}

TEST_CASE("stiffness from distances") {
    Context c;
    const double d[3] = {0.0, 0.5, 1.0};
    double s[3] = {-1, -1, -1};
    REQUIRE(defcap_stiffness_from_distances(c.ctx, d, 3, 4.0, s) == DEFCAP_OK);
    CHECK(s[0] == 1.0);
    CHECK(s[1] == 0.0625);
    CHECK(s[2] == 0.0);
}

TEST_CASE("mesh handles") {
    Context c;
    const fs::path obj = scratch("tet.obj");
    {
        std::ofstream out(obj);
        out << "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\nf 1 4 3\nf 2 3 4\n";
    }
    defcap_mesh* mesh = nullptr;
    REQUIRE(defcap_mesh_load_obj(c.ctx, obj.string().c_str(), &mesh) == DEFCAP_OK);
    CHECK(defcap_mesh_vertex_count(mesh) == 4);
    CHECK(defcap_mesh_triangle_count(mesh) == 4);
    std::vector<double> v(12);
    REQUIRE(defcap_mesh_vertices(c.ctx, mesh, v.data(), v.size()) == DEFCAP_OK);
    CHECK(v[3] == 1.0);
    CHECK(v[11] == 1.0);
    CHECK(defcap_mesh_vertices(c.ctx, mesh, v.data(), 11) == DEFCAP_ERR_INVALID_ARGUMENT);
    defcap_mesh_destroy(mesh);

    defcap_mesh* missing = nullptr;
    CHECK(defcap_mesh_load_obj(c.ctx, scratch("missing.obj").string().c_str(), &missing) == DEFCAP_ERR_NOT_FOUND);
    CHECK(missing == nullptr);
    CHECK(defcap_mesh_vertex_count(nullptr) == 0);
}

TEST_CASE("run reports errors by code") {
    Context c;
    const std::string out = scratch("run").string();
    defcap_run_options o{};
    o.subcommand = "nonsense";
    o.out_dir = out.c_str();
    CHECK(defcap_run(c.ctx, &o) == DEFCAP_ERR_INVALID_ARGUMENT);
    CHECK(defcap_run(c.ctx, nullptr) == DEFCAP_ERR_INVALID_ARGUMENT);
    CHECK(defcap_run(nullptr, &o) == DEFCAP_ERR_INVALID_ARGUMENT);

    const fs::path cfg = scratch("eval.json");
    {
        std::ofstream(cfg) << R"({"prediction": "absent", "ground_truth": "absent"})";
    }
    const std::string cfg_path = cfg.string();
    o.subcommand = "eval";
    o.config_path = cfg_path.c_str();
    CHECK(defcap_run(c.ctx, &o) == DEFCAP_ERR_NOT_FOUND);

    {
        std::ofstream(cfg) << R"({"prediction": "a", "ground_truth": "b", "unknown_key": 1})";
    }
    CHECK(defcap_run(c.ctx, &o) == DEFCAP_ERR_VALIDATION);
    CHECK(std::string(defcap_last_error(c.ctx)).find("unknown_key") != std::string::npos);
}

TEST_CASE("run inspect writes a manifest") {
    Context c;
    const fs::path obj = scratch("tri.obj");
    {
        std::ofstream(obj) << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
    }
    const fs::path cfg = scratch("inspect.json");
    {
        std::ofstream(cfg) << R"({"mesh": "tri.obj"})";
    }
    const fs::path out = scratch("inspect_out");
    fs::remove_all(out);
    const std::string cfg_path = cfg.string(), out_path = out.string();
    defcap_run_options o{};
    o.subcommand = "inspect";
    o.config_path = cfg_path.c_str();
    o.out_dir = out_path.c_str();
    REQUIRE(defcap_run(c.ctx, &o) == DEFCAP_OK);
    CHECK(fs::exists(out / "inspect.json"));
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(std::string(defcap_run_summary(c.ctx)).find("1 triangles") != std::string::npos);
}
