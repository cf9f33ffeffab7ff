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

#include "defcap/geom/mesh.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

namespace defcap::geom {

struct ObjData {
    Points vertices;
    std::vector<Triangle> triangles;
};

// Triangles only: faces with more than three corners are rejected. Texture and
// normal references ("f 1/2/3 ...") are accepted and ignored.
ObjData parse_obj(std::istream& in, const std::string& source_name = "<stream>");
ObjData read_obj(const std::filesystem::path& path);
TriMesh load_obj_mesh(const std::filesystem::path& path);

// Coordinates use shortest round-trip formatting so that equal inputs produce
// byte-identical files. Optional per-vertex colors are appended as "v x y z r g b".
void write_obj(std::ostream& out, std::span<const Vec3> vertices, std::span<const Triangle> triangles,
               std::span<const Vec3> colors = {});
void write_obj(const std::filesystem::path& path, std::span<const Vec3> vertices,
               std::span<const Triangle> triangles, std::span<const Vec3> colors = {});

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

} // namespace defcap::geom
