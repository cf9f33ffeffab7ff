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

#include <cstdint>
#include <memory>

namespace defcap::scenario {

struct ProxyConfig {
    int head_levels = 4;         // icosphere subdivision; 2562 vertices
    Vec3 head_radii{0.075, 0.10, 0.09};
    int skull_levels = 3;
    int hand_target_vertices = 792;
    int ring_segments = 8;       // vertices per finger cross-section
    int shape_count = 10;
    int expression_count = 10;

    void validate() const;
    int head_vertex_target() const;
};

/// Procedural stand-ins for a head model, a hand model and a skull. The head
/// faces -z in its canonical frame with +y up; the hand palm faces -z with
/// fingers along +y.
struct Proxies {
    std::shared_ptr<const model::DeformableModel> face;
    std::shared_ptr<const model::DeformableModel> hand;
    std::shared_ptr<const geom::TriMesh> skull;
};

/// Expression coefficient slots with fixed meaning.
inline constexpr int kOpenMouth = 0;
inline constexpr int kSmile = 1;

Proxies build_proxies(std::uint64_t seed, const ProxyConfig& config = {});

enum class HandPose { open, pointing, fist };

/// Articulation vector for a canned pose.
VecX hand_pose(const model::DeformableModel& hand, HandPose pose);

/// Radius of the head ellipsoid surface along a unit direction.
double ellipsoid_radius(const Vec3& radii, const Vec3& direction);

} // namespace defcap::scenario
