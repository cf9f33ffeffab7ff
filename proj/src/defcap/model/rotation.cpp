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

#include "defcap/model/rotation.hpp"

#include <cmath>

namespace defcap::model {

namespace {
constexpr double kSmallAngle = 1e-10;
}

Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
    return m;
}

Mat3 axis_angle_to_matrix(const Vec3& r) {
    const double theta = r.norm();
    if (theta < kSmallAngle) return Mat3::Identity() + skew(r);
    return Eigen::AngleAxisd(theta, r / theta).toRotationMatrix();
}

std::array<Vec3, 3> rotation_tangents(const Vec3& r) {
    const double sq = r.squaredNorm();
    if (sq < kSmallAngle * kSmallAngle) return {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
    const Mat3 i_minus_r = Mat3::Identity() - axis_angle_to_matrix(r);
    std::array<Vec3, 3> out;
    for (int k = 0; k < 3; ++k) {
        out[static_cast<std::size_t>(k)] = (r[k] * r + r.cross(i_minus_r.col(k))) / sq;
    }
    return out;
}

} // namespace defcap::model
