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

#include "defcap/geom/query.hpp"
#include "defcap/pbd/solver.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <numbers>

using namespace defcap;
using namespace defcap::pbd;

namespace {

double bend_c(const std::array<Vec3, 4>& p, double phi0) {
    const Vec3 n1 = (p[1] - p[0]).cross(p[2] - p[0]).normalized();
    const Vec3 n2 = (p[1] - p[0]).cross(p[3] - p[0]).normalized();
    return std::acos(std::clamp(n1.dot(n2), -1.0, 1.0)) - phi0;
}

geom::TriMesh plane_collider(double half, double z) {
    return geom::build_topology({{-half, -half, z}, {half, -half, z}, {half, half, z}, {-half, half, z}},
                                {{0, 1, 2}, {0, 2, 3}});
}

} // namespace

TEST_CASE("per_iteration_stiffness composes to k") {
    for (double k : {0.0, 0.1, 0.5, 0.9, 1.0}) {
        const double kp = per_iteration_stiffness(k, 7);
        CHECK(1.0 - std::pow(1.0 - kp, 7) == doctest::Approx(k).epsilon(1e-12));
    }
    CHECK(per_iteration_stiffness(0.5, 1) == 0.5);
}

TEST_CASE("project_stretch examples") {
    auto r = project_stretch({0, 0, 0}, {1, 0, 0}, 1, 1, 1.0, 1.0);
    CHECK(r.delta_a.norm() == 0.0);
    CHECK(r.delta_b.norm() == 0.0);
    r = project_stretch({0, 0, 0}, {2, 0, 0}, 1, 1, 1.0, 1.0);
    CHECK((Vec3(0, 0, 0) + r.delta_a - Vec3(0.5, 0, 0)).norm() < 1e-15);
    CHECK((Vec3(2, 0, 0) + r.delta_b - Vec3(1.5, 0, 0)).norm() < 1e-15);
    r = project_stretch({0, 0, 0}, {2, 0, 0}, 1, 1, 1.0, 0.5);
    CHECK((r.delta_a - Vec3(0.25, 0, 0)).norm() < 1e-15);
    CHECK((Vec3(2, 0, 0) + r.delta_b - Vec3(1.75, 0, 0)).norm() < 1e-15);
    r = project_stretch({1, 1, 1}, {1, 1, 1}, 1, 1, 1.0, 1.0);
    CHECK(r.degenerate);
    CHECK(r.delta_a.norm() == 0.0);
}

TEST_CASE("project_bend: zero at rest angle, momentum conserving, gradient matches finite differences") {
    const std::array<Vec3, 4> flat{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, 1, 0), Vec3(0.5, -1, 0)};
    const auto at_rest = project_bend(flat, {1, 1, 1, 1}, bend_c(flat, 0.0), 1.0);
    for (const auto& d : at_rest.delta) CHECK(d.norm() == 0.0);

    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        auto pts = testsupport::random_points(rng, 4, -1, 1);
        const std::array<Vec3, 4> p{pts[0], pts[1], pts[2], pts[3]};
        const std::array<double, 4> w{u(rng), u(rng), u(rng), u(rng)};
        double d = 0.0;
        std::array<Vec3, 4> g;
        if (!normal_dot_gradient(p, d, g) || std::abs(d) > 0.99) continue;
        const double phi0 = 0.3;
        const auto corr = project_bend(p, w, phi0, 1.0);
        REQUIRE_FALSE(corr.skipped);
        Vec3 momentum = Vec3::Zero();
        for (std::size_t i = 0; i < 4; ++i) momentum += corr.delta[i] / w[i];
        CHECK(momentum.norm() < 1e-9 * (1.0 + corr.delta[0].norm()));

        // Central finite differences of C; the correction is -s * w_i * grad_i.
        Eigen::Matrix<double, 12, 1> fd, an;
        const double h = 1e-6;
        for (std::size_t i = 0; i < 4; ++i) {
            for (int k = 0; k < 3; ++k) {
                auto pp = p, pm = p;
                pp[i][k] += h;
                pm[i][k] -= h;
                fd[static_cast<int>(3 * i) + k] = (bend_c(pp, phi0) - bend_c(pm, phi0)) / (2 * h);
                an[static_cast<int>(3 * i) + k] = -corr.delta[i][k] / w[i];
            }
        }
        const double cosine = fd.dot(an) / (fd.norm() * an.norm());
        CHECK(std::abs(cosine) > 0.999);
        // A small step along the correction reduces |C|.
        const auto small = project_bend(p, w, phi0, 1e-3);
        std::array<Vec3, 4> q = p;
        for (std::size_t i = 0; i < 4; ++i) q[i] += small.delta[i];
        CHECK(std::abs(bend_c(q, phi0)) <= std::abs(bend_c(p, phi0)));
        ++checked;
    }
    CHECK(checked > 50);

    const std::array<Vec3, 4> folded{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, 1, 0), Vec3(0.5, 1, 0)};
    CHECK(project_bend(folded, {1, 1, 1, 1}, 1.0, 1.0).skipped);
}

TEST_CASE("project_collision and project_track examples") {
    const Vec3 n(0, 0, 1);
    CHECK(project_collision({0, 0, 0.2}, n, 0.0).norm() == 0.0);
    CHECK((project_collision({0, 0, -0.1}, n, 0.0) - Vec3(0, 0, 0.1)).norm() < 1e-15);
    CHECK((project_collision({0, 0, 0}, n, 0.005) - Vec3(0, 0, 0.005)).norm() < 1e-15);
    CHECK(project_track({1, 2, 3}, {1, 2, 3}, 0.5).norm() == 0.0);
    CHECK(Vec3(Vec3(1, 2, 3) + project_track({1, 2, 3}, {4, 5, 6}, 1.0)) == Vec3(4, 5, 6));
    CHECK((project_track({0, 0, 0}, {1, 0, 0}, 0.25) - Vec3(0.25, 0, 0)).norm() < 1e-15);
}

TEST_CASE("friction_correction: static, kinetic and zero motion") {
    const Vec3 n(0, 0, 1);
    CHECK(friction_correction({0, 0, -0.01}, n, 0.01, 0.5, 0.5).norm() == 0.0);
    CHECK((friction_correction({0.001, 0, 0}, n, 0.01, 0.5, 0.5) - Vec3(-0.001, 0, 0)).norm() < 1e-15);
    // Slide 0.02 against depth 0.01: static limit 0.005 exceeded, kinetic factor 0.5 * 0.01 / 0.02 = 0.25.
    const Vec3 c = friction_correction({0.02, 0, 0.003}, n, 0.01, 0.5, 0.5);
    CHECK(c.x() == doctest::Approx(-0.02 * 0.25).epsilon(1e-12));
    CHECK(c.y() == 0.0);
    CHECK(c.z() == 0.0);
}

TEST_CASE("step: no constraints and zero velocity leaves the state unchanged") {
    const auto m = testsupport::grid(3, 3, 0.1);
    auto state = SimState::at_rest(m.vertices());
    ConstraintSet cs;
    step(state, m, cs, {}, SolverConfig{});
    CHECK(state.positions == m.vertices());
}

TEST_CASE("step: single stretched edge converges in one step") {
    const auto m = geom::build_topology({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
    Points x = m.vertices();
    x[1] = {1.5, 0, 0};
    auto state = SimState::at_rest(x);
    ConstraintSet cs;
    cs.stretch.push_back({0, 1.0, 1.0}); // edge (0, 1)
    SolverConfig cfg;
    cfg.iterations = 10;
    step(state, m, cs, {}, cfg);
    const double len = (state.positions[0] - state.positions[1]).norm();
    CHECK(std::abs(len - 1.0) < 1e-6);
}

TEST_CASE("step: pinned vertices never move and internal corrections conserve momentum") {
    const auto m = testsupport::grid(4, 4, 0.1);
    Points x = m.vertices();
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(-0.02, 0.02);
    for (auto& p : x) p += Vec3(u(rng), u(rng), u(rng));
    auto state = SimState::at_rest(x);
    auto cs = internal_constraints(m, stiffness::uniform_stiffness(m, 0.7), m.vertices(), StiffnessCoupling{});
    SolverConfig cfg;
    cfg.friction_static = cfg.friction_kinetic = 0.0;

    auto free_state = state;
    Vec3 before = Vec3::Zero();
    for (const auto& p : free_state.positions) before += p;
    step(free_state, m, cs, {}, cfg);
    Vec3 after = Vec3::Zero();
    for (const auto& p : free_state.positions) after += p;
    CHECK((after - before).norm() < 1e-12);

    state.inv_mass[0] = 0.0;
    state.inv_mass[7] = 0.0;
    for (int s = 0; s < 5; ++s) step(state, m, cs, {}, cfg);
    CHECK(state.positions[0] == x[0]);
    CHECK(state.positions[7] == x[7]);
}

TEST_CASE("step: deterministic trajectories") {
    const auto m = testsupport::sphere(2, 0.05, {0, 0, 0.05});
    const auto plane = plane_collider(0.5, 0.0);
    auto run = [&] {
        Points x = m.vertices();
        for (auto& p : x) p.z() -= 0.008;
        auto state = SimState::at_rest(x);
        auto cs = internal_constraints(m, stiffness::uniform_stiffness(m, 0.5), m.vertices(), StiffnessCoupling{});
        cs.track = track_constraints(stiffness::uniform_stiffness(m, 0.5), x, StiffnessCoupling{});
        const std::vector<ColliderFrame> col{{&plane, plane.vertices(), {}}};
        for (int s = 0; s < 10; ++s) step(state, m, cs, col, SolverConfig{});
        return state.positions;
    };
    CHECK(run() == run());
}

TEST_CASE("step: sphere pushed onto a plane stays above it") {
    const auto m = testsupport::sphere(2, 0.05, {0, 0, 0.05});
    const auto plane = plane_collider(0.5, 0.0);
    const auto map = stiffness::uniform_stiffness(m, 0.5);
    auto state = SimState::at_rest(m.vertices());
    SolverConfig cfg;
    cfg.skin_offset = 0.0;
    for (int frame = 0; frame < 20; ++frame) {
        Points target = m.vertices();
        const double push = 0.008 * std::min(1.0, frame / 5.0);
        for (auto& p : target) p.z() -= push;
        auto cs = internal_constraints(m, map, m.vertices(), StiffnessCoupling{});
        cs.track = track_constraints(map, target, StiffnessCoupling{});
        const std::vector<ColliderFrame> col{{&plane, plane.vertices(), {}}};
        step(state, m, cs, col, cfg);
        double lowest = 1e9;
        for (const auto& p : state.positions) lowest = std::min(lowest, p.z());
        CHECK(lowest >= -1e-5);
    }
}

TEST_CASE("simulate_tracking: no contact gives zero displacement") {
    const auto m = testsupport::sphere(2, 0.1);
    const auto hand = testsupport::sphere(1, 0.02, {0.3, 0, 0});
    std::vector<Points> ref(4, m.vertices());
    for (std::size_t t = 0; t < ref.size(); ++t)
        for (auto& p : ref[t]) p.x() += 0.001 * static_cast<double>(t);
    std::vector<Points> col(4, hand.vertices());
    const auto r = simulate_tracking(m, stiffness::uniform_stiffness(m, 0.5), ref, &hand, col, TrackingOptions{});
    double worst = 0.0;
    for (const auto& f : r.displacements)
        for (const auto& d : f) worst = std::max(worst, d.lpNorm<Eigen::Infinity>());
    CHECK(worst < 1e-6);
    for (int c : r.contact_counts) CHECK(c == 0);
}

TEST_CASE("simulate_tracking: local poke moves the surface near the collider only") {
    const auto m = testsupport::sphere(3, 0.1);
    const auto finger = testsupport::sphere(2, 0.01);
    const int frames = 10;
    std::vector<Points> ref(frames, m.vertices());
    std::vector<Points> col;
    for (int t = 0; t < frames; ++t) {
        const double depth = 0.01 * std::min(1.0, t / 5.0);
        Points c = finger.vertices();
        for (auto& p : c) p += Vec3(0.1 + 0.01 - depth, 0, 0);
        col.push_back(std::move(c));
    }
    TrackingOptions opt;
    opt.steps_per_frame = 4;
    const auto r = simulate_tracking(m, stiffness::uniform_stiffness(m, 0.5), ref, &finger, col, opt);
    const auto& last = r.displacements.back();
    double peak = 0.0, far = 0.0;
    for (std::size_t i = 0; i < last.size(); ++i) {
        const double n = last[i].norm();
        peak = std::max(peak, n);
        if ((m.vertices()[i] - Vec3(0.1, 0, 0)).norm() > 0.05) far = std::max(far, n);
    }
    CHECK(peak >= 0.009);
    CHECK(far < 0.2 * peak);
    for (double pen : r.max_penetration) CHECK(pen <= 1e-5);
}

TEST_CASE("simulate_tracking: topology mismatch is rejected with the frame") {
    const auto m = testsupport::sphere(1, 0.1);
    std::vector<Points> ref{m.vertices(), Points(3)};
    try {
        simulate_tracking(m, stiffness::uniform_stiffness(m, 0.5), ref, nullptr, {}, TrackingOptions{});
        FAIL("expected rejection");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("frame 1") != std::string::npos);
    }
}
