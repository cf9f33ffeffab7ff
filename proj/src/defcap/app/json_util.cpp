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

#include "defcap/app/json_util.hpp"

#include <fstream>
#include <limits>
#include <sstream>

namespace defcap::app {

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::not_found, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorCode::validation, path.string() + ": " + e.what());
    }
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(out), ErrorCode::io, "cannot write " + tmp.string());
        out << content;
        out.flush();
        require(static_cast<bool>(out), ErrorCode::io, "failed writing " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    require(!ec, ErrorCode::io, "cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void write_json_atomic(const fs::path& path, const json& value) { write_file_atomic(path, value.dump(2) + "\n"); }

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

json to_json(const VecX& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

namespace {

double finite_number(const json& j, const std::string& what) {
    require(j.is_number(), ErrorCode::validation, what + " must be a number");
    const double v = j.get<double>();
    require(std::isfinite(v), ErrorCode::validation, what + " must be finite");
    return v;
}

} // namespace

Vec3 vec3_from_json(const json& j, const std::string& what) {
    require(j.is_array() && j.size() == 3, ErrorCode::validation, what + " must be an array of 3 numbers");
    return {finite_number(j[0], what), finite_number(j[1], what), finite_number(j[2], what)};
}

Vec2 vec2_from_json(const json& j, const std::string& what) {
    require(j.is_array() && j.size() == 2, ErrorCode::validation, what + " must be an array of 2 numbers");
    return {finite_number(j[0], what), finite_number(j[1], what)};
}

VecX vecx_from_json(const json& j, const std::string& what) {
    require(j.is_array(), ErrorCode::validation, what + " must be an array");
    VecX out(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) out[static_cast<Eigen::Index>(i)] = finite_number(j[i], what);
    return out;
}

json params_to_json(const model::ModelParams& p) {
    return {{"translation", to_json(p.translation)},
            {"rotation", to_json(p.rotation)},
            {"shape", to_json(p.shape)},
            {"expression", to_json(p.expression)},
            {"articulation", to_json(p.articulation)}};
}

model::ModelParams params_from_json(const json& j, const model::DeformableModel& model, const std::string& what) {
    require(j.is_object(), ErrorCode::validation, what + " must be an object");
    auto p = model::ModelParams::zeros(model);
    if (j.contains("translation")) p.translation = vec3_from_json(j["translation"], what + ".translation");
    if (j.contains("rotation")) p.rotation = vec3_from_json(j["rotation"], what + ".rotation");
    if (j.contains("shape")) p.shape = vecx_from_json(j["shape"], what + ".shape");
    if (j.contains("expression")) p.expression = vecx_from_json(j["expression"], what + ".expression");
    if (j.contains("articulation")) p.articulation = vecx_from_json(j["articulation"], what + ".articulation");
    try {
        p.validate(model);
    } catch (const Error& e) {
        fail(ErrorCode::validation, what + ": " + e.what());
    }
    return p;
}

ConfigReader::ConfigReader(const json& object, std::string context) : object_(object), context_(std::move(context)) {
    if (object_.is_null()) object_ = json::object();
    require(object_.is_object(), ErrorCode::validation, context_ + " must be a JSON object");
}

bool ConfigReader::has(const std::string& key) const { return object_.contains(key); }

const json* ConfigReader::value(const std::string& key) {
    used_.insert(key);
    const auto it = object_.find(key);
    return it == object_.end() ? nullptr : &*it;
}

double ConfigReader::number(const std::string& key, double fallback) {
    const json* v = value(key);
    return v ? finite_number(*v, context_ + "." + key) : fallback;
}

int ConfigReader::integer(const std::string& key, int fallback) {
    const json* v = value(key);
    if (!v) return fallback;
    require(v->is_number_integer(), ErrorCode::validation, context_ + "." + key + " must be an integer");
    const auto x = v->get<std::int64_t>();
    require(x >= std::numeric_limits<int>::min() && x <= std::numeric_limits<int>::max(), ErrorCode::validation,
            context_ + "." + key + " is out of range");
    return static_cast<int>(x);
}

std::uint64_t ConfigReader::unsigned64(const std::string& key, std::uint64_t fallback) {
    const json* v = value(key);
    if (!v) return fallback;
    require(v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0), ErrorCode::validation,
            context_ + "." + key + " must be a non-negative integer");
    return v->get<std::uint64_t>();
}

bool ConfigReader::boolean(const std::string& key, bool fallback) {
    const json* v = value(key);
    if (!v) return fallback;
    require(v->is_boolean(), ErrorCode::validation, context_ + "." + key + " must be true or false");
    return v->get<bool>();
}

std::string ConfigReader::string(const std::string& key, const std::string& fallback) {
    const json* v = value(key);
    if (!v) return fallback;
    require(v->is_string(), ErrorCode::validation, context_ + "." + key + " must be a string");
    return v->get<std::string>();
}

Vec3 ConfigReader::vec3(const std::string& key, const Vec3& fallback) {
    const json* v = value(key);
    return v ? vec3_from_json(*v, context_ + "." + key) : fallback;
}

ConfigReader ConfigReader::object(const std::string& key) {
    const json* v = value(key);
    return ConfigReader(v ? *v : json::object(), context_ + "." + key);
}

const json& ConfigReader::raw(const std::string& key) {
    static const json null_value;
    const json* v = value(key);
    return v ? *v : null_value;
}

void ConfigReader::finish() const {
    std::string unknown;
    for (const auto& [key, _] : object_.items()) {
        if (used_.count(key) == 0) unknown += (unknown.empty() ? "" : ", ") + key;
    }
    require(unknown.empty(), ErrorCode::validation, context_ + ": unknown key(s) " + unknown);
}

} // namespace defcap::app
