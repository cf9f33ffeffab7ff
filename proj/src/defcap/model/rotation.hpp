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

namespace defcap::model {

/// Rodrigues map from an axis-angle vector to a rotation matrix.
Mat3 axis_angle_to_matrix(const Vec3& r);

/// Vectors a_k with dR/dr_k = [a_k]x R.
std::array<Vec3, 3> rotation_tangents(const Vec3& r);

Mat3 skew(const Vec3& v);

/// Rigid map x -> R x + t.
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
    Vec3 apply_inverse(const Vec3& y) const { return rotation.transpose() * (y - translation); }
    RigidTransform inverse() const { return {rotation.transpose(), -(rotation.transpose() * translation)}; }
    RigidTransform compose(const RigidTransform& inner) const {
        return {rotation * inner.rotation, rotation * inner.translation + translation};
    }
};

} // namespace defcap::model
