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

#include "defcap/scenario/proxies.hpp"

#include "defcap/geom/primitives.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace defcap::scenario {

using model::DeformableModel;
using model::Joint;
using geom::Triangle;

namespace {

double smoothstep(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
}

double front_mask(const Vec3& q) { return smoothstep(-q.z() / 0.4); }

double lower_face_mask(const Vec3& q) {
    return smoothstep((-0.4 - q.y()) / 0.3) * front_mask(q) * std::exp(-std::pow(q.x() / 0.6, 2));
}

double tissue_thickness(const Vec3& q) {
    const double f = front_mask(q);
    const double cheek = std::exp(-(std::pow(std::abs(q.x()) - 0.55, 2) / 0.04 + std::pow(q.y() + 0.2, 2) / 0.06));
    const double chin = std::exp(-(q.x() * q.x() / 0.08 + std::pow(q.y() + 0.65, 2) / 0.04));
    return 0.004 + 0.020 * cheek * f + 0.010 * chin * f;
}

std::vector<int> face_landmarks(const Points& dirs) {
    std::vector<Vec2> layout;
    const double pi = std::numbers::pi;
    for (int i = 0; i < 17; ++i) {
        const double phi = pi + pi * i / 16.0;
        layout.emplace_back(0.8 * std::cos(phi), -0.15 + 0.65 * std::sin(phi));
    }
    for (int side = -1; side <= 1; side += 2) {
        for (int k = 0; k < 5; ++k) {
            const double x = side < 0 ? -0.55 + 0.1 * k : 0.15 + 0.1 * k;
            layout.emplace_back(x, 0.42 + 0.04 * std::sin(pi * k / 4.0));
        }
    }
    for (double y : {0.25, 0.15, 0.05, -0.05}) layout.emplace_back(0.0, y);
    for (int k = -2; k <= 2; ++k) layout.emplace_back(0.07 * k, -0.15);
    for (double cx : {-0.33, 0.33}) {
        for (int k = 0; k < 6; ++k) layout.emplace_back(cx + 0.12 * std::cos(pi * k / 3.0), 0.25 + 0.05 * std::sin(pi * k / 3.0));
    }
    for (int k = 0; k < 12; ++k) layout.emplace_back(0.28 * std::cos(pi * k / 6.0), -0.45 + 0.09 * std::sin(pi * k / 6.0));
    for (int k = 0; k < 8; ++k) layout.emplace_back(0.16 * std::cos(pi * k / 4.0), -0.45 + 0.035 * std::sin(pi * k / 4.0));

    std::vector<int> out;
    std::vector<bool> used(dirs.size(), false);
    for (const auto& target : layout) {
        int best = -1;
        double best_d = 0.0;
        for (std::size_t i = 0; i < dirs.size(); ++i) {
            if (used[i] || dirs[i].z() > -0.2) continue;
            const double d = (dirs[i].head<2>() - target).squaredNorm();
            if (best < 0 || d < best_d) {
                best = static_cast<int>(i);
                best_d = d;
            }
        }
        used[static_cast<std::size_t>(best)] = true;
        out.push_back(best);
    }
    return out;
}

std::shared_ptr<const DeformableModel> build_face(std::mt19937_64& rng, const ProxyConfig& cfg) {
    const auto sphere = geom::unit_icosphere(cfg.head_levels);
    const Points& dirs = sphere.vertices();
    const std::size_t n = dirs.size();
    Points v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3& q = dirs[i];
        v[i] = cfg.head_radii.cwiseProduct(q);
        if (q.z() < 0.0) {
            const Vec3 normal = q.cwiseQuotient(cfg.head_radii).normalized();
            const double bump = std::exp(-(std::pow(q.x() / 0.12, 2) + std::pow((q.y() + 0.05) / 0.2, 2)));
            v[i] += 0.022 * bump * normal;
        }
    }
    auto m = std::make_shared<DeformableModel>();
    m->name = "head";
    m->mesh = std::make_shared<const geom::TriMesh>(geom::build_topology(v, sphere.triangles()));

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    m->shape_basis = MatX::Zero(static_cast<Eigen::Index>(3 * n), cfg.shape_count);
    for (int k = 0; k < cfg.shape_count; ++k) {
        Eigen::Matrix<double, 3, 9> a;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 9; ++c) a(r, c) = gauss(rng) / 3.0;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3& q = dirs[i];
            Eigen::Matrix<double, 9, 1> mono;
            mono << q.x(), q.y(), q.z(), q.x() * q.x() - 1.0 / 3.0, q.y() * q.y() - 1.0 / 3.0, q.z() * q.z() - 1.0 / 3.0,
                q.x() * q.y(), q.y() * q.z(), q.z() * q.x();
            m->shape_basis.block<3, 1>(static_cast<Eigen::Index>(3 * i), k) = 0.004 * a * mono;
        }
    }
    m->expression_basis = MatX::Zero(static_cast<Eigen::Index>(3 * n), cfg.expression_count);
    for (int k = 0; k < cfg.expression_count; ++k) {
        Vec2 centre(-0.6 + 1.2 * uni(rng), -0.7 + 1.2 * uni(rng));
        Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
        dir = 0.004 * dir.normalized();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3& q = dirs[i];
            Vec3 d = Vec3::Zero();
            if (k == kOpenMouth) {
                d = lower_face_mask(q) * Vec3(0.0, -0.012, -0.004);
            } else if (k == kSmile) {
                for (double side : {-1.0, 1.0}) {
                    const double g = std::exp(-(std::pow(q.x() - side * 0.28, 2) + std::pow(q.y() + 0.45, 2)) / 0.01);
                    d += g * front_mask(q) * Vec3(side * 0.005, 0.006, 0.002);
                }
            } else {
                const double g = std::exp(-(q.head<2>() - centre).squaredNorm() / (0.15 * 0.15));
                d = g * front_mask(q) * dir;
            }
            m->expression_basis.block<3, 1>(static_cast<Eigen::Index>(3 * i), k) = d;
        }
    }
    Joint jaw;
    jaw.name = "jaw";
    jaw.pivot = Vec3(0.0, -0.02, 0.0);
    jaw.axis = Vec3::UnitX();
    jaw.weights = VecX(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) jaw.weights[static_cast<Eigen::Index>(i)] = lower_face_mask(dirs[i]);
    m->joints.push_back(std::move(jaw));
    m->landmark_indices = face_landmarks(dirs);
    return m;
}

std::shared_ptr<const geom::TriMesh> build_skull(const ProxyConfig& cfg) {
    const auto sphere = geom::unit_icosphere(cfg.skull_levels);
    Points v;
    for (const auto& d : sphere.vertices()) {
        const double rho = ellipsoid_radius(cfg.head_radii, d);
        const Vec3 q = (rho * d).cwiseQuotient(cfg.head_radii);
        v.push_back((rho - tissue_thickness(q)) * d);
    }
    return std::make_shared<const geom::TriMesh>(geom::build_topology(std::move(v), sphere.triangles()));
}

struct FingerSpec {
    const char* name;
    Vec3 base;
    Vec3 dir;
    double radius;
    std::array<double, 3> lengths;
};

const std::array<FingerSpec, 5>& finger_specs() {
    static const std::array<FingerSpec, 5> specs{{
        {"thumb", {-0.052, -0.008, 0.0}, Vec3(-0.6, 0.8, 0.0).normalized(), 0.0095, {0.030, 0.028, 0.024}},
        {"index", {-0.027, 0.050, 0.0}, Vec3::UnitY(), 0.0085, {0.042, 0.025, 0.020}},
        {"middle", {-0.009, 0.052, 0.0}, Vec3::UnitY(), 0.0085, {0.046, 0.028, 0.021}},
        {"ring", {0.009, 0.050, 0.0}, Vec3::UnitY(), 0.0085, {0.044, 0.026, 0.020}},
        {"little", {0.026, 0.046, 0.0}, Vec3::UnitY(), 0.0075, {0.034, 0.020, 0.018}},
    }};
    return specs;
}

void orient_outward(const Points& v, std::vector<Triangle>& tris, std::size_t first_tri) {
    std::span<const Triangle> part(tris.data() + first_tri, tris.size() - first_tri);
    if (geom::signed_volume(v, part) < 0.0) {
        for (std::size_t t = first_tri; t < tris.size(); ++t) std::swap(tris[t][1], tris[t][2]);
    }
}

std::shared_ptr<const DeformableModel> build_hand(const ProxyConfig& cfg) {
    const auto palm = geom::unit_icosphere(2);
    const Vec3 palm_radii(0.040, 0.045, 0.012);
    Points v;
    std::vector<Triangle> tris = palm.triangles();
    for (const auto& d : palm.vertices()) v.push_back(palm_radii.cwiseProduct(d));

    const int m = cfg.ring_segments;
    const int per_finger = (cfg.hand_target_vertices - static_cast<int>(v.size())) / 5;
    const int rings = std::max(6, static_cast<int>(std::lround(static_cast<double>(per_finger - 2) / m)));

    struct VertexTag {
        int finger = -1;
        double u = 0.0;
    };
    std::vector<VertexTag> tags(v.size());
    std::vector<int> landmarks;
    {
        int wrist = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i].y() < v[static_cast<std::size_t>(wrist)].y()) wrist = static_cast<int>(i);
        }
        landmarks.push_back(wrist);
    }

    const double delta = 0.004;
    std::vector<Joint> joints;
    for (std::size_t f = 0; f < finger_specs().size(); ++f) {
        const auto& spec = finger_specs()[f];
        const double total = spec.lengths[0] + spec.lengths[1] + spec.lengths[2];
        const Vec3 e1 = spec.dir.cross(Vec3::UnitZ()).normalized();
        const Vec3 e2 = spec.dir.cross(e1);
        const int base_id = static_cast<int>(v.size());
        const std::size_t first_tri = tris.size();
        v.push_back(spec.base);
        tags.push_back({static_cast<int>(f), 0.0});
        std::vector<double> ring_u;
        for (int k = 0; k < rings; ++k) {
            const double u = (total - 0.35 * spec.radius) * k / (rings - 1);
            double r = spec.radius;
            if (u > total - spec.radius) {
                const double s = (u - (total - spec.radius)) / spec.radius;
                r = spec.radius * std::max(0.25, std::sqrt(std::max(0.0, 1.0 - s * s)));
            }
            ring_u.push_back(u);
            for (int j = 0; j < m; ++j) {
                const double phi = 2.0 * std::numbers::pi * j / m;
                v.push_back(spec.base + u * spec.dir + r * (std::cos(phi) * e1 + std::sin(phi) * e2));
                tags.push_back({static_cast<int>(f), u});
            }
        }
        const int tip = static_cast<int>(v.size());
        v.push_back(spec.base + total * spec.dir);
        tags.push_back({static_cast<int>(f), total});
        auto ring = [&](int k, int j) { return base_id + 1 + k * m + (j % m); };
        for (int j = 0; j < m; ++j) {
            tris.push_back({base_id, ring(0, j + 1), ring(0, j)});
            for (int k = 0; k + 1 < rings; ++k) {
                tris.push_back({ring(k, j), ring(k, j + 1), ring(k + 1, j + 1)});
                tris.push_back({ring(k, j), ring(k + 1, j + 1), ring(k + 1, j)});
            }
            tris.push_back({ring(rings - 1, j), ring(rings - 1, j + 1), tip});
        }
        orient_outward(v, tris, first_tri);

        const Vec3 flex = spec.dir.cross(-Vec3::UnitZ()).normalized();
        const std::array<double, 3> pivots{0.0, spec.lengths[0], spec.lengths[0] + spec.lengths[1]};
        int palm_side = 0;
        for (int j = 1; j < m; ++j) {
            const double phi = 2.0 * std::numbers::pi * j / m;
            const double phi_best = 2.0 * std::numbers::pi * palm_side / m;
            if ((std::cos(phi) * e1 + std::sin(phi) * e2).z() < (std::cos(phi_best) * e1 + std::sin(phi_best) * e2).z())
                palm_side = j;
        }
        for (int level = 0; level < 3; ++level) {
            Joint joint;
            joint.name = std::string(spec.name) + "_" + std::to_string(level + 1);
            joint.parent = level == 0 ? -1 : static_cast<int>(joints.size()) - 1;
            joint.pivot = spec.base + pivots[static_cast<std::size_t>(level)] * spec.dir;
            joint.axis = flex;
            joints.push_back(std::move(joint));
            int nearest = 0;
            for (int k = 1; k < rings; ++k) {
                if (std::abs(ring_u[static_cast<std::size_t>(k)] - pivots[static_cast<std::size_t>(level)]) <
                    std::abs(ring_u[static_cast<std::size_t>(nearest)] - pivots[static_cast<std::size_t>(level)]))
                    nearest = k;
            }
            landmarks.push_back(ring(nearest, palm_side));
        }
        landmarks.push_back(tip);
    }

    const auto n = static_cast<Eigen::Index>(v.size());
    for (auto& j : joints) j.weights = VecX::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& tag = tags[static_cast<std::size_t>(i)];
        if (tag.finger < 0) continue;
        const auto& spec = finger_specs()[static_cast<std::size_t>(tag.finger)];
        const double s_pip = smoothstep((tag.u - (spec.lengths[0] - delta)) / (2 * delta));
        const double s_dip = smoothstep((tag.u - (spec.lengths[0] + spec.lengths[1] - delta)) / (2 * delta));
        const auto j0 = static_cast<std::size_t>(3 * tag.finger);
        joints[j0].weights[i] = 1.0 - s_pip;
        joints[j0 + 1].weights[i] = s_pip - s_dip;
        joints[j0 + 2].weights[i] = s_dip;
    }

    auto hand = std::make_shared<DeformableModel>();
    hand->name = "hand";
    hand->mesh = std::make_shared<const geom::TriMesh>(geom::build_topology(v, std::move(tris)));
    hand->shape_basis = MatX(3 * n, 1);
    for (Eigen::Index i = 0; i < n; ++i) hand->shape_basis.block<3, 1>(3 * i, 0) = 0.05 * v[static_cast<std::size_t>(i)];
    hand->expression_basis = MatX::Zero(3 * n, 0);
    hand->joints = std::move(joints);
    hand->landmark_indices = std::move(landmarks);
    return hand;
}

} // namespace

void ProxyConfig::validate() const {
    require(head_levels >= 1 && head_levels <= 6, ErrorCode::validation, "head_levels must lie in [1, 6]");
    require(skull_levels >= 1 && skull_levels <= 6, ErrorCode::validation, "skull_levels must lie in [1, 6]");
    require(head_radii.minCoeff() > 0.03, ErrorCode::validation, "head radii must exceed 0.03 m");
    require(ring_segments >= 4, ErrorCode::validation, "ring_segments must be >= 4");
    require(hand_target_vertices >= 162 + 5 * (6 * ring_segments + 2), ErrorCode::validation,
            "hand_target_vertices too small for the ring resolution");
    require(shape_count >= 0 && expression_count >= 2, ErrorCode::validation,
            "need shape_count >= 0 and expression_count >= 2");
}

int ProxyConfig::head_vertex_target() const { return 10 * (1 << (2 * head_levels)) + 2; }

double ellipsoid_radius(const Vec3& radii, const Vec3& direction) {
    return 1.0 / direction.cwiseQuotient(radii).norm();
}

Proxies build_proxies(std::uint64_t seed, const ProxyConfig& config) {
    config.validate();
    std::mt19937_64 rng(seed);
    Proxies p;
    p.face = build_face(rng, config);
    p.hand = build_hand(config);
    p.skull = build_skull(config);
    p.face->validate();
    p.hand->validate();
    return p;
}

VecX hand_pose(const DeformableModel& hand, HandPose pose) {
    VecX a = VecX::Zero(3 * hand.joint_count());
    for (int j = 0; j < hand.joint_count(); ++j) {
        const auto& joint = hand.joints[static_cast<std::size_t>(j)];
        const bool thumb = joint.name.rfind("thumb", 0) == 0;
        const bool index = joint.name.rfind("index", 0) == 0;
        double angle = 0.0;
        if (pose == HandPose::fist) angle = thumb ? 0.5 : 1.3;
        if (pose == HandPose::pointing) angle = index ? 0.0 : (thumb ? 0.5 : 1.3);
        a.segment<3>(3 * j) = angle * joint.axis;
    }
    return a;
}

} // namespace defcap::scenario
