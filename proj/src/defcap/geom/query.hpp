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

#include <span>
#include <utility>
#include <vector>

namespace defcap::geom {

struct SurfaceQueryResult {
    Vec3 point = Vec3::Zero();
    int triangle_index = -1;
    /// Angle-weighted pseudo-normal of the closest feature (face, edge or vertex).
    Vec3 normal = Vec3::UnitZ();
    /// Negative inside. |signed_distance| == |query - point|.
    double signed_distance = 0.0;
    /// Barycentric coordinates of point within triangle_index.
    Vec3 barycentric = Vec3::Zero();
};

/// Closest point on a single triangle with barycentric coordinates.
struct TrianglePoint {
    Vec3 point;
    Vec3 barycentric;
};
TrianglePoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Acceleration structure over one posed surface: an AABB tree per connected
/// component plus face, edge and vertex pseudo-normals.
///
/// Built once per set of positions; queries are const and may run in parallel.
class SurfaceIndex {
public:
    SurfaceIndex(const TriMesh& mesh, std::span<const Vec3> positions);

    /// Exact closest point over all triangles. Ties go to the lower triangle index.
    SurfaceQueryResult closest(const Vec3& q) const;

    /// Signed distance to the union of closed components: the component
    /// result with the smallest signed distance.
    SurfaceQueryResult signed_query(const Vec3& q) const;

    /// Cheap bounding-box test (always true for open surfaces): false means every signed distance from q is at
    /// least max(threshold, 0), so signed_query(q) cannot fall below threshold.
    bool may_be_within(const Vec3& q, double threshold) const;

    /// Non-watertight surfaces still answer queries, but the sign is only a
    /// normal-direction test and callers should surface a warning.
    bool watertight() const { return mesh_->watertight(); }

    const TriMesh& mesh() const { return *mesh_; }
    std::span<const Vec3> positions() const { return positions_; }

private:
    struct Node {
        Eigen::AlignedBox3d box;
        int left = -1;
        int right = -1;
        int first = 0;
        int count = 0;
    };
    struct Tree {
        std::vector<Node> nodes;
        std::vector<int> tris;
    };

    int build_node(Tree& tree, int first, int count, const std::vector<Vec3>& centroids);
    SurfaceQueryResult query_tree(const Tree& tree, const Vec3& q) const;
    SurfaceQueryResult finish(const Vec3& q, int tri, const TrianglePoint& tp) const;

    const TriMesh* mesh_;
    std::vector<Vec3> positions_;
    std::vector<Vec3> face_normals_;
    std::vector<Vec3> edge_normals_;
    std::vector<Vec3> vertex_normals_;
    std::vector<Tree> trees_;
    Tree all_;
};

/// Convenience wrapper building a temporary index.
SurfaceQueryResult closest_point(const Vec3& query, const TriMesh& mesh, std::span<const Vec3> positions);

/// Brute-force scan over every triangle; test oracle and tiny meshes.
SurfaceQueryResult closest_point_brute_force(const Vec3& query, const TriMesh& mesh, std::span<const Vec3> positions);

struct PenetrationSet {
    std::vector<std::pair<int, SurfaceQueryResult>> hits;
    /// Set when the target is not watertight and the sign is only indicative.
    bool sign_unreliable = false;
};

/// Probe vertices whose signed distance to the target is below threshold
/// (threshold 0 gives the penetrating set). Sorted by probe index.
PenetrationSet proximity_set(std::span<const Vec3> probes, const SurfaceIndex& target, double threshold);

PenetrationSet penetration_set(std::span<const Vec3> probes, const TriMesh& target_mesh,
                               std::span<const Vec3> target_positions);

} // namespace defcap::geom
