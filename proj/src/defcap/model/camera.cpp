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

#include "defcap/model/camera.hpp"

#include <cmath>

namespace defcap::model {

void Camera::validate() const {
    require(fx > 0.0 && fy > 0.0 && std::isfinite(fx) && std::isfinite(fy), ErrorCode::validation,
            "camera focal lengths must be positive");
    require(std::isfinite(cx) && std::isfinite(cy), ErrorCode::validation, "camera principal point must be finite");
}

Vec2 Camera::project(const Vec3& p) const {
    require(p.z() > 0.0, ErrorCode::numerical, "point behind the camera (z <= 0)");
    return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
}

Eigen::Matrix<double, 2, 3> Camera::project_jacobian(const Vec3& p) const {
    require(p.z() > 0.0, ErrorCode::numerical, "point behind the camera (z <= 0)");
    const double iz = 1.0 / p.z();
    Eigen::Matrix<double, 2, 3> j;
    j << fx * iz, 0.0, -fx * p.x() * iz * iz, 0.0, fy * iz, -fy * p.y() * iz * iz;
    return j;
}

std::vector<Vec2> project(const Camera& camera, std::span<const Vec3> points) {
    std::vector<Vec2> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        require(points[i].z() > 0.0, ErrorCode::numerical,
                "point " + std::to_string(i) + " is behind the camera (z <= 0)");
        out[i] = camera.project(points[i]);
    }
    return out;
}

} // namespace defcap::model
