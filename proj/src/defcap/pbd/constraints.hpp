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

namespace defcap::pbd {

/// Per-iteration stiffness 1 - (1 - k)^(1/n): n projections at k' compose to
/// a total correction fraction of k.
double per_iteration_stiffness(double k, int iterations);

struct StretchCorrection {
    Vec3 delta_a = Vec3::Zero();
    Vec3 delta_b = Vec3::Zero();
    bool degenerate = false; // coincident points, no direction to correct along
};

/// Projection of |pa - pb| - l0 = 0.
StretchCorrection project_stretch(const Vec3& pa, const Vec3& pb, double wa, double wb, double rest_length,
                                  double k_iter);

struct BendCorrection {
    std::array<Vec3, 4> delta{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    bool skipped = false; // degenerate wing or |n1 . n2| too close to 1
};

/// Gradient of d = n1 . n2 with n1 = unit((p2-p1)x(p3-p1)), n2 = unit((p2-p1)x(p4-p1)).
/// Returns false when a wing is degenerate.
bool normal_dot_gradient(const std::array<Vec3, 4>& p, double& d, std::array<Vec3, 4>& grad);

/// Projection of acos(n1 . n2) - phi0 = 0 along its analytic gradient.
BendCorrection project_bend(const std::array<Vec3, 4>& p, const std::array<double, 4>& w, double rest_angle,
                            double k_iter);

/// Unilateral half-space n . p - h >= 0, projected with stiffness 1.
Vec3 project_collision(const Vec3& p, const Vec3& n, double h);

/// Moves p a fraction k_iter of the way to its target.
Vec3 project_track(const Vec3& p, const Vec3& target, double k_iter);

/// Position-level Coulomb friction on one contact: the tangential part of
/// relative_motion is cancelled when shorter than mu_s * depth, otherwise
/// reduced by min(mu_k * depth / |tangential|, 1). Returns the correction to
/// add to the particle position.
Vec3 friction_correction(const Vec3& relative_motion, const Vec3& normal, double depth, double mu_static,
                         double mu_kinetic);

} // namespace defcap::pbd
