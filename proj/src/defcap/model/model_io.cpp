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

#include "defcap/model/model_io.hpp"

#include "defcap/geom/obj_io.hpp"

#include <json.hpp>

#include <bit>
#include <fstream>

namespace defcap::model {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little, "sidecar I/O assumes a little-endian host");

json read_json(const fs::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::not_found, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorCode::validation, path.string() + ": " + e.what());
    }
}

void write_doubles(std::ofstream& out, const double* data, std::size_t count) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

void read_doubles(std::ifstream& in, double* data, std::size_t count, const fs::path& path) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
    require(static_cast<std::size_t>(in.gcount()) == count * sizeof(double), ErrorCode::validation,
            path.string() + ": sidecar is shorter than declared");
}

Vec3 vec3_from(const json& j, const std::string& what) {
    require(j.is_array() && j.size() == 3, ErrorCode::validation, what + " must be a 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

} // namespace

void save_model(const DeformableModel& model, const fs::path& json_path) {
    model.validate();
    const fs::path dir = json_path.parent_path();
    const std::string stem = json_path.stem().string();
    geom::write_obj(dir / (stem + ".obj"), model.mesh->vertices(), model.mesh->triangles());

    std::ofstream bin(dir / (stem + ".bin"), std::ios::binary);
    require(static_cast<bool>(bin), ErrorCode::io, "cannot write " + (dir / (stem + ".bin")).string());
    write_doubles(bin, model.shape_basis.data(), static_cast<std::size_t>(model.shape_basis.size()));
    write_doubles(bin, model.expression_basis.data(), static_cast<std::size_t>(model.expression_basis.size()));
    for (const auto& jt : model.joints) write_doubles(bin, jt.weights.data(), static_cast<std::size_t>(jt.weights.size()));
    require(static_cast<bool>(bin), ErrorCode::io, "failed writing model sidecar");

    json j;
    j["format"] = "defcap-model";
    j["version"] = 1;
    j["name"] = model.name;
    j["template_obj"] = stem + ".obj";
    j["bases"] = stem + ".bin";
    j["vertex_count"] = model.vertex_count();
    j["shape_count"] = model.shape_count();
    j["expression_count"] = model.expression_count();
    j["landmarks"] = model.landmark_indices;
    j["joints"] = json::array();
    for (const auto& jt : model.joints) {
        j["joints"].push_back({{"name", jt.name},
                               {"parent", jt.parent},
                               {"pivot", {jt.pivot.x(), jt.pivot.y(), jt.pivot.z()}},
                               {"axis", {jt.axis.x(), jt.axis.y(), jt.axis.z()}}});
    }
    std::ofstream out(json_path);
    require(static_cast<bool>(out), ErrorCode::io, "cannot write " + json_path.string());
    out << j.dump(2) << '\n';
}

DeformableModel load_model(const fs::path& json_path) {
    const json j = read_json(json_path);
    const fs::path dir = json_path.parent_path();
    DeformableModel model;
    try {
        require(j.value("format", "") == "defcap-model", ErrorCode::validation,
                json_path.string() + ": not a model file");
        model.name = j.at("name").get<std::string>();
        model.mesh = std::make_shared<const geom::TriMesh>(
            geom::load_obj_mesh(dir / j.at("template_obj").get<std::string>()));
        const auto n = static_cast<Eigen::Index>(model.mesh->vertex_count());
        require(j.at("vertex_count").get<Eigen::Index>() == n, ErrorCode::validation,
                json_path.string() + ": vertex_count does not match the template");
        const auto s = j.at("shape_count").get<Eigen::Index>();
        const auto e = j.at("expression_count").get<Eigen::Index>();
        model.landmark_indices = j.at("landmarks").get<std::vector<int>>();
        for (const auto& jj : j.at("joints")) {
            Joint jt;
            jt.name = jj.at("name").get<std::string>();
            jt.parent = jj.at("parent").get<int>();
            jt.pivot = vec3_from(jj.at("pivot"), "joint pivot");
            jt.axis = vec3_from(jj.at("axis"), "joint axis");
            model.joints.push_back(std::move(jt));
        }
        const fs::path bin_path = dir / j.at("bases").get<std::string>();
        std::ifstream bin(bin_path, std::ios::binary);
        require(static_cast<bool>(bin), ErrorCode::not_found, "cannot open " + bin_path.string());
        model.shape_basis.resize(3 * n, s);
        model.expression_basis.resize(3 * n, e);
        read_doubles(bin, model.shape_basis.data(), static_cast<std::size_t>(3 * n * s), bin_path);
        read_doubles(bin, model.expression_basis.data(), static_cast<std::size_t>(3 * n * e), bin_path);
        for (auto& jt : model.joints) {
            jt.weights.resize(n);
            read_doubles(bin, jt.weights.data(), static_cast<std::size_t>(n), bin_path);
        }
    } catch (const json::exception& ex) {
        fail(ErrorCode::validation, json_path.string() + ": " + ex.what());
    }
    model.validate();
    return model;
}

void save_camera(const Camera& camera, const fs::path& path) {
    camera.validate();
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorCode::io, "cannot write " + path.string());
    out << json{{"fx", camera.fx}, {"fy", camera.fy}, {"cx", camera.cx}, {"cy", camera.cy}}.dump(2) << '\n';
}

Camera load_camera(const fs::path& path) {
    const json j = read_json(path);
    Camera c;
    try {
        c.fx = j.at("fx").get<double>();
        c.fy = j.at("fy").get<double>();
        c.cx = j.at("cx").get<double>();
        c.cy = j.at("cy").get<double>();
    } catch (const json::exception& e) {
        fail(ErrorCode::validation, path.string() + ": " + e.what());
    }
    c.validate();
    return c;
}

} // namespace defcap::model
