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

#include "defcap/geom/query.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace defcap::geom {

namespace {

constexpr int kLeafSize = 4;

double box_distance2(const Eigen::AlignedBox3d& box, const Vec3& q) {
    double d2 = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double lo = box.min()[k] - q[k];
        const double hi = q[k] - box.max()[k];
        const double d = std::max({lo, hi, 0.0});
        d2 += d * d;
    }
    return d2;
}

Vec3 safe_normalized(const Vec3& v) {
    const double n = v.norm();
    return n > 0.0 ? Vec3(v / n) : Vec3::UnitZ();
}

} // namespace

// Region classification follows Ericson, Real-Time Collision Detection, 5.1.5.
TrianglePoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 ap = p - a;
    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return {a, Vec3(1, 0, 0)};

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return {b, Vec3(0, 1, 0)};

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return {a + v * ab, Vec3(1 - v, v, 0)};
    }

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return {c, Vec3(0, 0, 1)};

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return {a + w * ac, Vec3(1 - w, 0, w)};
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return {b + w * (c - b), Vec3(0, 1 - w, w)};
    }

    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom;
    const double w = vc * denom;
    return {a + ab * v + ac * w, Vec3(1 - v - w, v, w)};
}

SurfaceIndex::SurfaceIndex(const TriMesh& mesh, std::span<const Vec3> positions)
    : mesh_(&mesh), positions_(positions.begin(), positions.end()) {
    require(positions.size() == mesh.vertex_count(), ErrorCode::invalid_argument,
            "positions count " + std::to_string(positions.size()) + " does not match mesh vertex count " +
                std::to_string(mesh.vertex_count()));
    require(mesh.triangle_count() > 0, ErrorCode::invalid_argument, "empty mesh");

    const auto nt = mesh.triangle_count();
    face_normals_.resize(nt);
    vertex_normals_.assign(mesh.vertex_count(), Vec3::Zero());
    edge_normals_.assign(mesh.edges().size(), Vec3::Zero());
    for (std::size_t t = 0; t < nt; ++t) {
        face_normals_[t] = triangle_normal(mesh, positions_, t);
        const auto& tri = mesh.triangles()[t];
        for (int k = 0; k < 3; ++k) {
            const auto i = static_cast<std::size_t>(tri[static_cast<std::size_t>(k)]);
            const auto j = static_cast<std::size_t>(tri[static_cast<std::size_t>((k + 1) % 3)]);
            const auto l = static_cast<std::size_t>(tri[static_cast<std::size_t>((k + 2) % 3)]);
            const Vec3 u = positions_[j] - positions_[i];
            const Vec3 w = positions_[l] - positions_[i];
            const double denom = u.norm() * w.norm();
            const double angle = denom > 0.0 ? std::acos(std::clamp(u.dot(w) / denom, -1.0, 1.0)) : 0.0;
            vertex_normals_[i] += angle * face_normals_[t];
            edge_normals_[static_cast<std::size_t>(mesh.triangle_edge(t, k))] += face_normals_[t];
        }
    }
    for (auto& n : vertex_normals_) n = safe_normalized(n);
    for (auto& n : edge_normals_) n = safe_normalized(n);

    std::vector<Vec3> centroids(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangles()[t];
        centroids[t] = (positions_[static_cast<std::size_t>(tri[0])] + positions_[static_cast<std::size_t>(tri[1])] +
                        positions_[static_cast<std::size_t>(tri[2])]) /
                       3.0;
    }
    trees_.resize(mesh.component_count());
    for (std::size_t t = 0; t < nt; ++t) {
        trees_[static_cast<std::size_t>(mesh.triangle_component(t))].tris.push_back(static_cast<int>(t));
        all_.tris.push_back(static_cast<int>(t));
    }
    for (auto& tree : trees_) build_node(tree, 0, static_cast<int>(tree.tris.size()), centroids);
    if (trees_.size() > 1) build_node(all_, 0, static_cast<int>(all_.tris.size()), centroids);
}

int SurfaceIndex::build_node(Tree& tree, int first, int count, const std::vector<Vec3>& centroids) {
    Node node;
    node.first = first;
    node.count = count;
    for (int i = first; i < first + count; ++i) {
        const auto& tri = mesh_->triangles()[static_cast<std::size_t>(tree.tris[static_cast<std::size_t>(i)])];
        for (int idx : tri) node.box.extend(positions_[static_cast<std::size_t>(idx)]);
    }
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(node);
    if (count <= kLeafSize) return id;

    Eigen::AlignedBox3d cbox;
    for (int i = first; i < first + count; ++i) cbox.extend(centroids[static_cast<std::size_t>(tree.tris[static_cast<std::size_t>(i)])]);
    int axis = 0;
    cbox.sizes().maxCoeff(&axis);
    const int mid = first + count / 2;
    auto begin = tree.tris.begin() + first;
    std::nth_element(begin, tree.tris.begin() + mid, begin + count, [&](int x, int y) {
        const double cx = centroids[static_cast<std::size_t>(x)][axis];
        const double cy = centroids[static_cast<std::size_t>(y)][axis];
        return cx < cy || (cx == cy && x < y);
    });
    const int left = build_node(tree, first, mid - first, centroids);
    const int right = build_node(tree, mid, first + count - mid, centroids);
    tree.nodes[static_cast<std::size_t>(id)].left = left;
    tree.nodes[static_cast<std::size_t>(id)].right = right;
    tree.nodes[static_cast<std::size_t>(id)].count = 0;
    return id;
}

SurfaceQueryResult SurfaceIndex::finish(const Vec3& q, int tri, const TrianglePoint& tp) const {
    SurfaceQueryResult r;
    r.point = tp.point;
    r.triangle_index = tri;
    r.barycentric = tp.barycentric;
    const auto t = static_cast<std::size_t>(tri);
    const auto& corners = mesh_->triangles()[t];
    constexpr double kZero = 1e-12;
    int zeros = 0;
    int nonzero_pattern = 0;
    for (int k = 0; k < 3; ++k) {
        if (tp.barycentric[k] <= kZero) {
            ++zeros;
        } else {
            nonzero_pattern |= 1 << k;
        }
    }
    if (zeros >= 2) {
        int k = 0;
        tp.barycentric.maxCoeff(&k);
        r.normal = vertex_normals_[static_cast<std::size_t>(corners[static_cast<std::size_t>(k)])];
    } else if (zeros == 1) {
        // Local edge (k, k+1) is the one whose two corners carry weight.
        int local = 0;
        if (nonzero_pattern == 0b011) local = 0;
        else if (nonzero_pattern == 0b110) local = 1;
        else local = 2;
        r.normal = edge_normals_[static_cast<std::size_t>(mesh_->triangle_edge(t, local))];
    } else {
        r.normal = face_normals_[t];
    }
    const Vec3 diff = q - tp.point;
    const double dist = diff.norm();
    r.signed_distance = diff.dot(r.normal) < 0.0 ? -dist : dist;
    return r;
}

SurfaceQueryResult SurfaceIndex::query_tree(const Tree& tree, const Vec3& q) const {
    double best = std::numeric_limits<double>::infinity();
    int best_tri = -1;
    TrianglePoint best_tp{Vec3::Zero(), Vec3::Zero()};
    int stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = tree.nodes[static_cast<std::size_t>(stack[--top])];
        if (box_distance2(node.box, q) > best) continue;
        if (node.left < 0) {
            for (int i = node.first; i < node.first + node.count; ++i) {
                const int t = tree.tris[static_cast<std::size_t>(i)];
                const auto& tri = mesh_->triangles()[static_cast<std::size_t>(t)];
                const auto tp = closest_point_on_triangle(q, positions_[static_cast<std::size_t>(tri[0])],
                                                          positions_[static_cast<std::size_t>(tri[1])],
                                                          positions_[static_cast<std::size_t>(tri[2])]);
                const double d2 = (q - tp.point).squaredNorm();
                if (d2 < best || (d2 == best && t < best_tri)) {
                    best = d2;
                    best_tri = t;
                    best_tp = tp;
                }
            }
            continue;
        }
        const auto& l = tree.nodes[static_cast<std::size_t>(node.left)];
        const auto& r = tree.nodes[static_cast<std::size_t>(node.right)];
        const double dl = box_distance2(l.box, q);
        const double dr = box_distance2(r.box, q);
        // Push the farther child first so the nearer one is explored first.
        if (dl <= dr) {
            stack[top++] = node.right;
            stack[top++] = node.left;
        } else {
            stack[top++] = node.left;
            stack[top++] = node.right;
        }
    }
    return finish(q, best_tri, best_tp);
}

SurfaceQueryResult SurfaceIndex::closest(const Vec3& q) const {
    return query_tree(trees_.size() > 1 ? all_ : trees_.front(), q);
}

SurfaceQueryResult SurfaceIndex::signed_query(const Vec3& q) const {
    SurfaceQueryResult best = query_tree(trees_.front(), q);
    for (std::size_t c = 1; c < trees_.size(); ++c) {
        const auto r = query_tree(trees_[c], q);
        if (r.signed_distance < best.signed_distance) best = r;
    }
    return best;
}

bool SurfaceIndex::may_be_within(const Vec3& q, double threshold) const {
    // Open surfaces report negative distances far outside their box.
    if (!watertight()) return true;
    const double reach = std::max(threshold, 0.0);
    for (const auto& tree : trees_) {
        const auto& box = tree.nodes.front().box;
        if (box.contains(q) || box_distance2(box, q) < reach * reach) return true;
    }
    return false;
}

SurfaceQueryResult closest_point(const Vec3& query, const TriMesh& mesh, std::span<const Vec3> positions) {
    return SurfaceIndex(mesh, positions).closest(query);
}

SurfaceQueryResult closest_point_brute_force(const Vec3& query, const TriMesh& mesh, std::span<const Vec3> positions) {
    require(mesh.triangle_count() > 0, ErrorCode::invalid_argument, "empty mesh");
    require(positions.size() == mesh.vertex_count(), ErrorCode::invalid_argument, "positions/mesh size mismatch");
    double best = std::numeric_limits<double>::infinity();
    SurfaceQueryResult out;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const auto tp = closest_point_on_triangle(query, positions[static_cast<std::size_t>(tri[0])],
                                                  positions[static_cast<std::size_t>(tri[1])],
                                                  positions[static_cast<std::size_t>(tri[2])]);
        const double d2 = (query - tp.point).squaredNorm();
        if (d2 < best) {
            best = d2;
            out.point = tp.point;
            out.barycentric = tp.barycentric;
            out.triangle_index = static_cast<int>(t);
        }
    }
    out.signed_distance = std::sqrt(best);
    return out;
}

PenetrationSet proximity_set(std::span<const Vec3> probes, const SurfaceIndex& target, double threshold) {
    std::vector<SurfaceQueryResult> results(probes.size());
    std::vector<char> hit(probes.size(), 0);
    parallel_for(probes.size(), [&](std::size_t i) {
        if (!target.may_be_within(probes[i], threshold)) return;
        results[i] = target.signed_query(probes[i]);
        hit[i] = results[i].signed_distance < threshold ? 1 : 0;
    });
    PenetrationSet out;
    out.sign_unreliable = !target.watertight();
    for (std::size_t i = 0; i < probes.size(); ++i) {
        if (hit[i]) out.hits.emplace_back(static_cast<int>(i), results[i]);
    }
    return out;
}

PenetrationSet penetration_set(std::span<const Vec3> probes, const TriMesh& target_mesh,
                               std::span<const Vec3> target_positions) {
    const SurfaceIndex index(target_mesh, target_positions);
    return proximity_set(probes, index, 0.0);
}

} // namespace defcap::geom
