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

#include "defcap/geom/obj_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace defcap::geom {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

ObjData parse_obj(std::istream& in, const std::string& source_name) {
    ObjData data;
    std::string line;
    std::size_t line_no = 0;
    std::vector<int> corners;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag.front() == '#') continue;
        auto where = [&] { return source_name + ":" + std::to_string(line_no); };
        if (tag == "v") {
            Vec3 p;
            if (!(ls >> p.x() >> p.y() >> p.z())) fail(ErrorCode::validation, where() + ": malformed vertex");
            data.vertices.push_back(p);
        } else if (tag == "f") {
            corners.clear();
            std::string tok;
            while (ls >> tok) {
                const auto slash = tok.find('/');
                const std::string head = tok.substr(0, slash);
                int idx = 0;
                const auto res = std::from_chars(head.data(), head.data() + head.size(), idx);
                if (res.ec != std::errc() || res.ptr != head.data() + head.size() || idx == 0) {
                    fail(ErrorCode::validation, where() + ": malformed face index '" + tok + "'");
                }
                // OBJ indices are 1-based; negative values count back from the end.
                const int zero_based = idx > 0 ? idx - 1 : static_cast<int>(data.vertices.size()) + idx;
                corners.push_back(zero_based);
            }
            if (corners.size() != 3) {
                fail(ErrorCode::validation,
                     where() + ": face with " + std::to_string(corners.size()) + " corners (triangles only)");
            }
            data.triangles.push_back({corners[0], corners[1], corners[2]});
        }
    }
    return data;
}

ObjData read_obj(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::not_found, "cannot open OBJ file " + path.string());
    return parse_obj(in, path.string());
}

TriMesh load_obj_mesh(const std::filesystem::path& path) {
    auto data = read_obj(path);
    return build_topology(std::move(data.vertices), std::move(data.triangles));
}

void write_obj(std::ostream& out, std::span<const Vec3> vertices, std::span<const Triangle> triangles,
               std::span<const Vec3> colors) {
    require(colors.empty() || colors.size() == vertices.size(), ErrorCode::invalid_argument,
            "color count must match vertex count");
    std::string buf;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        buf = "v ";
        buf += format_double(vertices[i].x());
        buf += ' ';
        buf += format_double(vertices[i].y());
        buf += ' ';
        buf += format_double(vertices[i].z());
        if (!colors.empty()) {
            for (int k = 0; k < 3; ++k) {
                buf += ' ';
                buf += format_double(colors[i][k]);
            }
        }
        buf += '\n';
        out << buf;
    }
    for (const auto& t : triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_obj(const std::filesystem::path& path, std::span<const Vec3> vertices,
               std::span<const Triangle> triangles, std::span<const Vec3> colors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write OBJ file " + path.string());
    write_obj(out, vertices, triangles, colors);
    if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

} // namespace defcap::geom
