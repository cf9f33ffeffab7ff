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
#include <vector>

namespace defcap::stiffness {

/// Tissue stiffness in [0, 1] on the vertices, edges and bend pairs of one mesh.
struct StiffnessMap {
    std::vector<double> vertex_stiffness;
    std::vector<double> edge_stiffness;
    std::vector<double> bend_stiffness;

    /// Throws Error(validation) if sizes disagree with the mesh or a value is outside [0, 1].
    void validate(const geom::TriMesh& mesh) const;
};

inline constexpr double kDefaultExponent = 4.0;

/// Unsigned distance from every skin vertex to the skull surface.
std::vector<double> ssd_distances(const geom::TriMesh& skin, const geom::TriMesh& skull);

/// s_i = (1 - d_hat_i)^b with d_hat the min-max normalised distance. A constant
/// distance vector has no normalisation; every vertex then gets s = 1.
std::vector<double> stiffness_from_distances(std::span<const double> distances, double exponent = kDefaultExponent);

/// Each target vertex takes the value of its nearest source vertex (lowest
/// source index on ties). Source and target must already share a frame.
std::vector<double> transfer_stiffness(std::span<const Vec3> source_vertices, std::span<const double> source_values,
                                       std::span<const Vec3> target_vertices);

/// Edge value = mean of its two endpoints, bend value = mean of the four bend-pair vertices.
StiffnessMap derive_edge_bend_stiffness(const geom::TriMesh& mesh, std::span<const double> vertex_stiffness);

/// Same value everywhere.
StiffnessMap uniform_stiffness(const geom::TriMesh& mesh, double value);

/// ssd_distances -> stiffness_from_distances -> transfer -> derive, as one call.
StiffnessMap ssd_stiffness(const geom::TriMesh& skin, const geom::TriMesh& skull, const geom::TriMesh& target,
                           double exponent = kDefaultExponent);

} // namespace defcap::stiffness
