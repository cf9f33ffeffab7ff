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

#include "defcap/geom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace defcap::geom {

namespace {

struct HalfEdgeRecord {
    Edge key;
    int tri;
    int local;
};

int find_root(std::vector<int>& parent, int i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
        auto& p = parent[static_cast<std::size_t>(i)];
        p = parent[static_cast<std::size_t>(p)];
        i = p;
    }
    return i;
}

void compute_rest(TriMesh& mesh, std::vector<double>& lengths, std::vector<double>& angles) {
    const auto& v = mesh.vertices();
    lengths.resize(mesh.edges().size());
    for (std::size_t e = 0; e < mesh.edges().size(); ++e) {
        const auto [a, b] = mesh.edges()[e];
        lengths[e] = (v[static_cast<std::size_t>(a)] - v[static_cast<std::size_t>(b)]).norm();
    }
    angles.resize(mesh.bend_pairs().size());
    for (std::size_t i = 0; i < mesh.bend_pairs().size(); ++i) {
        const auto& bp = mesh.bend_pairs()[i];
        const auto phi = dihedral_angle(v[static_cast<std::size_t>(bp.p1)], v[static_cast<std::size_t>(bp.p2)],
                                        v[static_cast<std::size_t>(bp.p3)], v[static_cast<std::size_t>(bp.p4)]);
        // Wings are non-degenerate by construction; the fallback only guards
        // rest positions supplied through with_rest_positions().
        angles[i] = phi.value_or(std::numbers::pi);
    }
}

} // namespace

std::optional<double> dihedral_angle(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& p4) {
    const Vec3 e = p2 - p1;
    const Vec3 c1 = e.cross(p3 - p1);
    const Vec3 c2 = e.cross(p4 - p1);
    const double l1 = c1.norm();
    const double l2 = c2.norm();
    const double scale = e.squaredNorm();
    if (l1 <= 1e-14 * scale || l2 <= 1e-14 * scale || scale == 0.0) return std::nullopt;
    const double d = std::clamp(c1.dot(c2) / (l1 * l2), -1.0, 1.0);
    return std::acos(d);
}

TriMesh build_topology(Points vertices, std::vector<Triangle> triangles) {
    require(!triangles.empty(), ErrorCode::validation, "mesh has no triangles");
    const auto nv = static_cast<int>(vertices.size());
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const auto& tri = triangles[t];
        for (int idx : tri) {
            if (idx < 0 || idx >= nv) {
                fail(ErrorCode::validation, "triangle " + std::to_string(t) + " references vertex " +
                                                std::to_string(idx) + " out of range [0, " +
                                                std::to_string(nv) + ")");
            }
        }
        const Vec3& a = vertices[static_cast<std::size_t>(tri[0])];
        const Vec3& b = vertices[static_cast<std::size_t>(tri[1])];
        const Vec3& c = vertices[static_cast<std::size_t>(tri[2])];
        const double longest = std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
        const double twice_area = (b - a).cross(c - a).norm();
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] || twice_area <= 1e-12 * longest ||
            longest == 0.0) {
            fail(ErrorCode::validation, "triangle " + std::to_string(t) + " is degenerate (zero area)");
        }
    }

    TriMesh mesh;
    mesh.vertices_ = std::move(vertices);
    mesh.triangles_ = std::move(triangles);

    std::vector<HalfEdgeRecord> records;
    records.reserve(mesh.triangles_.size() * 3);
    for (std::size_t t = 0; t < mesh.triangles_.size(); ++t) {
        const auto& tri = mesh.triangles_[t];
        for (int k = 0; k < 3; ++k) {
            const int a = tri[static_cast<std::size_t>(k)];
            const int b = tri[static_cast<std::size_t>((k + 1) % 3)];
            records.push_back({Edge{std::min(a, b), std::max(a, b)}, static_cast<int>(t), k});
        }
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const HalfEdgeRecord& x, const HalfEdgeRecord& y) { return x.key < y.key; });

    mesh.tri_edges_.assign(mesh.triangles_.size(), {-1, -1, -1});
    bool closed = true;
    for (std::size_t i = 0; i < records.size();) {
        std::size_t j = i;
        while (j < records.size() && records[j].key == records[i].key) ++j;
        if (j - i > 2) {
            fail(ErrorCode::validation, "edge (" + std::to_string(records[i].key[0]) + ", " +
                                            std::to_string(records[i].key[1]) + ") is shared by " +
                                            std::to_string(j - i) + " triangles, first is triangle " +
                                            std::to_string(records[i].tri));
        }
        const int e = static_cast<int>(mesh.edges_.size());
        mesh.edges_.push_back(records[i].key);
        std::array<int, 2> tris{records[i].tri, -1};
        if (j - i == 2) {
            tris[1] = records[i + 1].tri;
        } else {
            closed = false;
        }
        mesh.edge_tris_.push_back(tris);
        for (std::size_t r = i; r < j; ++r) {
            mesh.tri_edges_[static_cast<std::size_t>(records[r].tri)][static_cast<std::size_t>(records[r].local)] = e;
        }
        i = j;
    }
    mesh.watertight_ = closed;

    auto wing = [&](int tri, const Edge& edge) {
        for (int idx : mesh.triangles_[static_cast<std::size_t>(tri)]) {
            if (idx != edge[0] && idx != edge[1]) return idx;
        }
        return -1;
    };
    for (std::size_t e = 0; e < mesh.edges_.size(); ++e) {
        const auto& tris = mesh.edge_tris_[e];
        if (tris[1] < 0) continue;
        const auto& edge = mesh.edges_[e];
        mesh.bend_pairs_.push_back({edge[0], edge[1], wing(tris[0], edge), wing(tris[1], edge), static_cast<int>(e)});
    }

    // Components via union-find over triangle corners.
    std::vector<int> parent(mesh.vertices_.size());
    std::iota(parent.begin(), parent.end(), 0);
    for (const auto& tri : mesh.triangles_) {
        for (int k = 1; k < 3; ++k) {
            const int r0 = find_root(parent, tri[0]);
            const int rk = find_root(parent, tri[static_cast<std::size_t>(k)]);
            if (rk != r0) parent[static_cast<std::size_t>(std::max(rk, r0))] = std::min(rk, r0);
        }
    }
    std::vector<int> root_label(mesh.vertices_.size(), -1);
    mesh.vert_component_.assign(mesh.vertices_.size(), -1);
    mesh.tri_component_.resize(mesh.triangles_.size());
    int labels = 0;
    for (std::size_t t = 0; t < mesh.triangles_.size(); ++t) {
        const auto root = static_cast<std::size_t>(find_root(parent, mesh.triangles_[t][0]));
        if (root_label[root] < 0) root_label[root] = labels++;
        mesh.tri_component_[t] = root_label[root];
        for (int idx : mesh.triangles_[t]) mesh.vert_component_[static_cast<std::size_t>(idx)] = root_label[root];
    }
    mesh.component_count_ = static_cast<std::size_t>(labels);

    compute_rest(mesh, mesh.rest_lengths_, mesh.rest_angles_);
    return mesh;
}

TriMesh TriMesh::with_rest_positions(std::span<const Vec3> positions) const {
    require(positions.size() == vertices_.size(), ErrorCode::invalid_argument,
            "rest positions count does not match mesh vertex count");
    TriMesh copy = *this;
    copy.vertices_.assign(positions.begin(), positions.end());
    compute_rest(copy, copy.rest_lengths_, copy.rest_angles_);
    return copy;
}

Vec3 triangle_normal(const TriMesh& mesh, std::span<const Vec3> positions, std::size_t t) {
    const auto& tri = mesh.triangles()[t];
    const Vec3& a = positions[static_cast<std::size_t>(tri[0])];
    const Vec3& b = positions[static_cast<std::size_t>(tri[1])];
    const Vec3& c = positions[static_cast<std::size_t>(tri[2])];
    const Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

std::vector<double> edge_lengths(const TriMesh& mesh, std::span<const Vec3> positions) {
    require(positions.size() == mesh.vertex_count(), ErrorCode::invalid_argument, "positions/mesh size mismatch");
    std::vector<double> out(mesh.edges().size());
    for (std::size_t e = 0; e < out.size(); ++e) {
        const auto [a, b] = mesh.edges()[e];
        out[e] = (positions[static_cast<std::size_t>(a)] - positions[static_cast<std::size_t>(b)]).norm();
    }
    return out;
}

std::vector<double> dihedral_angles(const TriMesh& mesh, std::span<const Vec3> positions) {
    require(positions.size() == mesh.vertex_count(), ErrorCode::invalid_argument, "positions/mesh size mismatch");
    std::vector<double> out(mesh.bend_pairs().size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& bp = mesh.bend_pairs()[i];
        out[i] = dihedral_angle(positions[static_cast<std::size_t>(bp.p1)], positions[static_cast<std::size_t>(bp.p2)],
                                positions[static_cast<std::size_t>(bp.p3)], positions[static_cast<std::size_t>(bp.p4)])
                     .value_or(std::numeric_limits<double>::quiet_NaN());
    }
    return out;
}

} // namespace defcap::geom
