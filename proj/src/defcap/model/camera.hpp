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

#include <span>
#include <vector>

namespace defcap::model {

/// Pinhole camera at the origin looking down +z.
struct Camera {
    double fx = 1000.0;
    double fy = 1000.0;
    double cx = 500.0;
    double cy = 500.0;

    void validate() const;
    /// Throws Error(numerical) when z <= 0.
    Vec2 project(const Vec3& p) const;
    /// d(u, v) / d(x, y, z).
    Eigen::Matrix<double, 2, 3> project_jacobian(const Vec3& p) const;
};

/// Projects every point; a point with z <= 0 is reported by index.
std::vector<Vec2> project(const Camera& camera, std::span<const Vec3> points);

} // namespace defcap::model
