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

#pragma once

#include "defcap/model/deformable_model.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <set>
#include <string>

namespace defcap::app {

using nlohmann::json;
namespace fs = std::filesystem;

json read_json_file(const fs::path& path);

/// Writes to a temporary sibling and renames it over the target.
void write_file_atomic(const fs::path& path, const std::string& content);
void write_json_atomic(const fs::path& path, const json& value);

json to_json(const Vec3& v);
json to_json(const Vec2& v);
json to_json(const VecX& v);
Vec3 vec3_from_json(const json& j, const std::string& what);
Vec2 vec2_from_json(const json& j, const std::string& what);
VecX vecx_from_json(const json& j, const std::string& what);

json params_to_json(const model::ModelParams& p);
/// Missing blocks default to zeros of the model's sizes.
model::ModelParams params_from_json(const json& j, const model::DeformableModel& model, const std::string& what);

/// Typed access to one JSON object. finish() rejects keys nobody asked for.
class ConfigReader {
public:
    ConfigReader(const json& object, std::string context);

    bool has(const std::string& key) const;
    double number(const std::string& key, double fallback);
    int integer(const std::string& key, int fallback);
    std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback);
    bool boolean(const std::string& key, bool fallback);
    std::string string(const std::string& key, const std::string& fallback);
    Vec3 vec3(const std::string& key, const Vec3& fallback);
    /// Nested object; an absent key gives an empty object.
    ConfigReader object(const std::string& key);
    const json& raw(const std::string& key);
    const std::string& context() const { return context_; }
    void finish() const;

private:
    const json* value(const std::string& key);

    json object_;
    std::string context_;
    std::set<std::string> used_;
};

} // namespace defcap::app
