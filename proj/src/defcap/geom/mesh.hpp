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

#include "defcap/common.hpp"

#include <array>
#include <optional>
#include <span>

namespace defcap::geom {

using Triangle = std::array<int, 3>;
using Edge = std::array<int, 2>;

/// Two triangles sharing the edge (p1, p2). The wing vertex p3 belongs to the
/// first incident triangle and p4 to the second, so the pair reads as the
/// triangles (p1, p3, p2) and (p1, p2, p4).
struct BendPair {
    int p1 = 0;
    int p2 = 0;
    int p3 = 0;
    int p4 = 0;
    int edge = 0;
};

/// Indexed triangle surface with derived topology and rest geometry.
///
/// Immutable after build_topology(); all queries are const and thread safe.
/// Edges are sorted (min, max) pairs in lexicographic order, which fixes the
/// iteration order of every per-edge loop downstream.
class TriMesh {
public:
    TriMesh() = default;

    const Points& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<BendPair>& bend_pairs() const { return bend_pairs_; }
    const std::vector<double>& rest_edge_lengths() const { return rest_lengths_; }
    const std::vector<double>& rest_dihedral_angles() const { return rest_angles_; }

    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t triangle_count() const { return triangles_.size(); }

    /// Incident triangles of an edge; the second entry is -1 on a boundary edge.
    const std::array<int, 2>& edge_triangles(std::size_t e) const { return edge_tris_[e]; }
    /// Edge index of the local edge (tri[k], tri[(k + 1) % 3]).
    int triangle_edge(std::size_t t, int k) const { return tri_edges_[t][static_cast<std::size_t>(k)]; }

    /// Connected components over shared vertices.
    std::size_t component_count() const { return component_count_; }
    int triangle_component(std::size_t t) const { return tri_component_[t]; }
    /// -1 for vertices not referenced by any triangle.
    int vertex_component(std::size_t v) const { return vert_component_[v]; }

    /// True when every edge has exactly two incident triangles.
    bool watertight() const { return watertight_; }

    /// Copy of this topology with rest data recomputed from other positions.
    TriMesh with_rest_positions(std::span<const Vec3> positions) const;

private:
    friend TriMesh build_topology(Points vertices, std::vector<Triangle> triangles);

    Points vertices_;
    std::vector<Triangle> triangles_;
    std::vector<Edge> edges_;
    std::vector<std::array<int, 2>> edge_tris_;
    std::vector<std::array<int, 3>> tri_edges_;
    std::vector<BendPair> bend_pairs_;
    std::vector<double> rest_lengths_;
    std::vector<double> rest_angles_;
    std::vector<int> tri_component_;
    std::vector<int> vert_component_;
    std::size_t component_count_ = 0;
    bool watertight_ = false;
};

/// Validates the input and derives edges, bend pairs and rest geometry.
/// Throws Error(validation) naming the offending triangle for out-of-range
/// indices, zero-area triangles and edges shared by more than two triangles.
TriMesh build_topology(Points vertices, std::vector<Triangle> triangles);

/// Angle in [0, pi] between the unit normals (p2-p1)x(p3-p1) and (p2-p1)x(p4-p1).
/// Coplanar wings on opposite sides of the hinge give pi. Returns nullopt when a
/// wing triangle is degenerate.
std::optional<double> dihedral_angle(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& p4);

/// Unit normal of triangle t at the given positions (zero vector if degenerate).
Vec3 triangle_normal(const TriMesh& mesh, std::span<const Vec3> positions, std::size_t t);

/// Current edge lengths and dihedral angles at arbitrary positions.
std::vector<double> edge_lengths(const TriMesh& mesh, std::span<const Vec3> positions);
std::vector<double> dihedral_angles(const TriMesh& mesh, std::span<const Vec3> positions);

} // namespace defcap::geom
