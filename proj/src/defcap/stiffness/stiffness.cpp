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

#include "defcap/stiffness/stiffness.hpp"

#include "defcap/geom/query.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace defcap::stiffness {

void StiffnessMap::validate(const geom::TriMesh& mesh) const {
    require(vertex_stiffness.size() == mesh.vertex_count(), ErrorCode::validation,
            "vertex stiffness count " + std::to_string(vertex_stiffness.size()) + " != vertex count " +
                std::to_string(mesh.vertex_count()));
    require(edge_stiffness.size() == mesh.edges().size(), ErrorCode::validation,
            "edge stiffness count does not match edge count");
    require(bend_stiffness.size() == mesh.bend_pairs().size(), ErrorCode::validation,
            "bend stiffness count does not match bend pair count");
    auto in_range = [](double s) { return s >= 0.0 && s <= 1.0; };
    require(std::all_of(vertex_stiffness.begin(), vertex_stiffness.end(), in_range) &&
                std::all_of(edge_stiffness.begin(), edge_stiffness.end(), in_range) &&
                std::all_of(bend_stiffness.begin(), bend_stiffness.end(), in_range),
            ErrorCode::validation, "stiffness values must lie in [0, 1]");
}

std::vector<double> ssd_distances(const geom::TriMesh& skin, const geom::TriMesh& skull) {
    require(skull.triangle_count() > 0, ErrorCode::invalid_argument, "empty skull mesh");
    const geom::SurfaceIndex index(skull, skull.vertices());
    std::vector<double> d(skin.vertex_count());
    parallel_for(d.size(), [&](std::size_t i) { d[i] = std::abs(index.closest(skin.vertices()[i]).signed_distance); });
    return d;
}

std::vector<double> stiffness_from_distances(std::span<const double> distances, double exponent) {
    require(!distances.empty(), ErrorCode::invalid_argument, "distance vector is empty");
    require(exponent > 0.0, ErrorCode::invalid_argument, "stiffness exponent must be positive");
    const auto [lo_it, hi_it] = std::minmax_element(distances.begin(), distances.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    std::vector<double> s(distances.size(), 1.0);
    if (!(range > 0.0)) return s;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double d_hat = std::clamp((distances[i] - lo) / range, 0.0, 1.0);
        s[i] = std::pow(1.0 - d_hat, exponent);
    }
    return s;
}

std::vector<double> transfer_stiffness(std::span<const Vec3> source_vertices, std::span<const double> source_values,
                                       std::span<const Vec3> target_vertices) {
    require(!source_vertices.empty(), ErrorCode::invalid_argument, "empty source for stiffness transfer");
    require(source_vertices.size() == source_values.size(), ErrorCode::invalid_argument,
            "source vertex/value count mismatch");
    std::vector<double> out(target_vertices.size());
    parallel_for(target_vertices.size(), [&](std::size_t t) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < source_vertices.size(); ++i) {
            const double d2 = (source_vertices[i] - target_vertices[t]).squaredNorm();
            if (d2 < best) {
                best = d2;
                best_i = i;
            }
        }
        out[t] = source_values[best_i];
    });
    return out;
}

StiffnessMap derive_edge_bend_stiffness(const geom::TriMesh& mesh, std::span<const double> vertex_stiffness) {
    require(vertex_stiffness.size() == mesh.vertex_count(), ErrorCode::invalid_argument,
            "vertex stiffness count does not match mesh");
    StiffnessMap map;
    map.vertex_stiffness.assign(vertex_stiffness.begin(), vertex_stiffness.end());
    auto s = [&](int i) { return vertex_stiffness[static_cast<std::size_t>(i)]; };
    map.edge_stiffness.reserve(mesh.edges().size());
    for (const auto& [a, b] : mesh.edges()) map.edge_stiffness.push_back(0.5 * (s(a) + s(b)));
    map.bend_stiffness.reserve(mesh.bend_pairs().size());
    for (const auto& bp : mesh.bend_pairs()) {
        map.bend_stiffness.push_back(0.25 * (s(bp.p1) + s(bp.p2) + s(bp.p3) + s(bp.p4)));
    }
    return map;
}

StiffnessMap uniform_stiffness(const geom::TriMesh& mesh, double value) {
    require(value >= 0.0 && value <= 1.0, ErrorCode::invalid_argument, "uniform stiffness must lie in [0, 1]");
    const std::vector<double> s(mesh.vertex_count(), value);
    return derive_edge_bend_stiffness(mesh, s);
}

StiffnessMap ssd_stiffness(const geom::TriMesh& skin, const geom::TriMesh& skull, const geom::TriMesh& target,
                           double exponent) {
    const auto d = ssd_distances(skin, skull);
    const auto s = stiffness_from_distances(d, exponent);
    const auto on_target = transfer_stiffness(skin.vertices(), s, target.vertices());
    return derive_edge_bend_stiffness(target, on_target);
}

} // namespace defcap::stiffness
