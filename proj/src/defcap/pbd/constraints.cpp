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

#include "defcap/pbd/constraints.hpp"

#include <algorithm>
#include <cmath>

namespace defcap::pbd {

namespace {
constexpr double kSingularDot = 1e-9;
}

double per_iteration_stiffness(double k, int iterations) {
    require(iterations >= 1, ErrorCode::invalid_argument, "iteration count must be >= 1");
    const double kc = std::clamp(k, 0.0, 1.0);
    if (kc >= 1.0) return 1.0;
    return 1.0 - std::pow(1.0 - kc, 1.0 / iterations);
}

StretchCorrection project_stretch(const Vec3& pa, const Vec3& pb, double wa, double wb, double rest_length,
                                  double k_iter) {
    StretchCorrection out;
    const double wsum = wa + wb;
    if (wsum <= 0.0) return out;
    const Vec3 diff = pa - pb;
    const double len = diff.norm();
    if (len <= 0.0) {
        out.degenerate = true;
        return out;
    }
    const Vec3 dir = diff / len;
    const double c = len - rest_length;
    out.delta_a = -k_iter * (wa / wsum) * c * dir;
    out.delta_b = k_iter * (wb / wsum) * c * dir;
    return out;
}

bool normal_dot_gradient(const std::array<Vec3, 4>& p, double& d, std::array<Vec3, 4>& grad) {
    const Vec3 e = p[1] - p[0];
    const Vec3 a = p[2] - p[0];
    const Vec3 b = p[3] - p[0];
    const Vec3 c1 = e.cross(a);
    const Vec3 c2 = e.cross(b);
    const double l1 = c1.norm();
    const double l2 = c2.norm();
    const double scale = e.squaredNorm();
    if (scale == 0.0 || l1 <= 1e-14 * scale || l2 <= 1e-14 * scale) return false;
    const Vec3 n1 = c1 / l1;
    const Vec3 n2 = c2 / l2;
    d = n1.dot(n2);
    const Vec3 g1 = (n2 - d * n1) / l1;
    const Vec3 g2 = (n1 - d * n2) / l2;
    grad[1] = a.cross(g1) + b.cross(g2);
    grad[2] = g1.cross(e);
    grad[3] = g2.cross(e);
    grad[0] = -(grad[1] + grad[2] + grad[3]);
    return true;
}

BendCorrection project_bend(const std::array<Vec3, 4>& p, const std::array<double, 4>& w, double rest_angle,
                            double k_iter) {
    BendCorrection out;
    double d = 0.0;
    std::array<Vec3, 4> grad_d;
    if (!normal_dot_gradient(p, d, grad_d) || std::abs(d) >= 1.0 - kSingularDot) {
        out.skipped = true;
        return out;
    }
    const double c = std::acos(std::clamp(d, -1.0, 1.0)) - rest_angle;
    if (c == 0.0) return out;
    const double root = std::sqrt(1.0 - d * d);
    double denom = 0.0;
    std::array<Vec3, 4> grad_c;
    for (std::size_t i = 0; i < 4; ++i) {
        grad_c[i] = -grad_d[i] / root;
        denom += w[i] * grad_c[i].squaredNorm();
    }
    if (denom <= 1e-300) {
        out.skipped = true;
        return out;
    }
    const double s = c / denom;
    for (std::size_t i = 0; i < 4; ++i) out.delta[i] = -k_iter * s * w[i] * grad_c[i];
    return out;
}

Vec3 project_collision(const Vec3& p, const Vec3& n, double h) {
    const double c = n.dot(p) - h;
    if (c >= 0.0) return Vec3::Zero();
    return -c * n;
}

Vec3 project_track(const Vec3& p, const Vec3& target, double k_iter) { return k_iter * (target - p); }

Vec3 friction_correction(const Vec3& relative_motion, const Vec3& normal, double depth, double mu_static,
                         double mu_kinetic) {
    const Vec3 tangential = relative_motion - relative_motion.dot(normal) * normal;
    const double len = tangential.norm();
    if (len == 0.0 || depth <= 0.0) return Vec3::Zero();
    if (len < mu_static * depth) return -tangential;
    return -tangential * std::min(mu_kinetic * depth / len, 1.0);
}

} // namespace defcap::pbd
