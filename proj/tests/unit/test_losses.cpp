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

#include "defcap/fit/losses.hpp"
#include "defcap/model/deformable_model.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

using namespace defcap;
using namespace defcap::fit;

namespace {

// Relative error between an analytic point gradient and central differences of f.
double fd_error(Points x, const Points& analytic, const std::function<double(const Points&)>& f) {
    const double h = 1e-6;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (int k = 0; k < 3; ++k) {
            const double keep = x[i][k];
            x[i][k] = keep + h;
            const double fp = f(x);
            x[i][k] = keep - h;
            const double fm = f(x);
            x[i][k] = keep;
            const double fd = (fp - fm) / (2 * h);
            num = std::max(num, std::abs(fd - analytic[i][k]));
            den = std::max(den, std::abs(fd));
        }
    }
    return num / std::max(den, 1e-12);
}

} // namespace

TEST_CASE("loss_2d examples and gradient") {
    const model::Camera cam;
    const Points pts{{0.01, -0.02, 0.5}};
    const auto px = cam.project(pts[0]);
    const std::vector<double> one{1.0}, zero{0.0};
    CHECK(loss_2d(cam, pts, std::vector<Vec2>{px}, one).value == 0.0);
    CHECK(loss_2d(cam, pts, std::vector<Vec2>{px + Vec2(30, 40)}, zero).value == 0.0);
    CHECK(loss_2d(cam, pts, std::vector<Vec2>{px + Vec2(3, 4)}, one).value == doctest::Approx(25.0).epsilon(1e-12));

    std::mt19937_64 rng(1);
    auto p3 = testsupport::random_points(rng, 5, -0.1, 0.1);
    for (auto& p : p3) p.z() += 0.6;
    std::vector<Vec2> ref;
    std::vector<double> conf{1, 0.5, 0.2, 0.9, 1};
    for (const auto& p : testsupport::random_points(rng, 5, 400, 600)) ref.emplace_back(p.x(), p.y());
    const auto l = loss_2d(cam, p3, ref, conf);
    CHECK(fd_error(p3, l.grad, [&](const Points& x) { return loss_2d(cam, x, ref, conf).value; }) < 1e-4);
    Points behind{{0, 0, -1}};
    CHECK_THROWS_AS(loss_2d(cam, behind, std::vector<Vec2>{Vec2(0, 0)}, one), Error);
}

TEST_CASE("loss_reg: static, constant velocity, hand oracle, gradient") {
    const double dt = 0.02;
    const std::vector<Points> still(4, Points{{0, 0, 0}, {1, 0, 0}});
    CHECK(loss_reg(VecX::Zero(2), std::vector<VecX>(4, VecX::Zero(3)), still, dt, 1e-5, 1e-3, 3e-4, 3e-4).value == 0.0);

    std::vector<Points> moving;
    const Vec3 v(0.1, 0.0, -0.05);
    for (int t = 0; t < 4; ++t) moving.push_back(Points{{t * dt * v}, {Vec3(1, 0, 0) + t * dt * v}});
    const auto m = loss_motion(moving, dt, 3e-4, 3e-4);
    CHECK(m.acceleration_term < 1e-12);
    CHECK(m.velocity_term == doctest::Approx(3e-4 * v.squaredNorm()).epsilon(1e-9));

    std::mt19937_64 rng(2);
    std::vector<Points> three;
    for (int t = 0; t < 3; ++t) three.push_back(testsupport::random_points(rng, 2, -0.01, 0.01));
    double vel = 0.0, acc = 0.0;
    for (int i = 0; i < 2; ++i) {
        vel += ((three[1][i] - three[0][i]) / dt).squaredNorm() + ((three[2][i] - three[1][i]) / dt).squaredNorm();
        acc += ((three[2][i] - 2 * three[1][i] + three[0][i]) / (dt * dt)).squaredNorm();
    }
    const auto m3 = loss_motion(three, dt, 0.3, 0.7);
    CHECK(m3.velocity_term == doctest::Approx(0.3 * vel / 4).epsilon(1e-12));
    CHECK(m3.acceleration_term == doctest::Approx(0.7 * acc / 2).epsilon(1e-12));
    CHECK(loss_motion(std::vector<Points>(three.begin(), three.begin() + 2), dt, 0.3, 0.7).acceleration_term == 0.0);

    // Gradient with respect to the middle frame.
    Points mid = three[1];
    const double g_err = fd_error(mid, m3.grad[1], [&](const Points& x) {
        auto f = three;
        f[1] = x;
        return loss_motion(f, dt, 0.3, 0.7).value;
    });
    CHECK(g_err < 1e-4);
    const VecX psi = VecX::Constant(3, 0.5);
    const auto r = loss_reg(VecX::Constant(2, 1.0), std::vector<VecX>{psi}, std::vector<Points>{three[0]}, dt, 1e-5,
                            1e-3, 0.0, 0.0);
    CHECK(r.value == doctest::Approx(1e-5 * 2 + 1e-3 * 0.75));
}

TEST_CASE("loss_touch: examples, brute-force oracle and symmetry") {
    ContactSet c{{1.0}, {1.0}};
    CHECK(loss_touch(Points{{1, 2, 3}}, Points{{1, 2, 3}}, c).value == 0.0);
    CHECK(loss_touch(Points{{0, 0, 0}}, Points{{1, 0, 0}}, c).value == doctest::Approx(2.0));
    const ContactSet none{{0.2}, {0.9}};
    const auto inactive = assign_touch(Points{{0, 0, 0}}, Points{{1, 0, 0}}, none);
    CHECK_FALSE(inactive.active);
    CHECK(loss_touch(Points{{0, 0, 0}}, Points{{1, 0, 0}}, none).value == 0.0);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto f = testsupport::random_points(rng, 10, -1, 1);
        const auto h = testsupport::random_points(rng, 8, -1, 1);
        ContactSet cs;
        for (int i = 0; i < 10; ++i) cs.face_probs.push_back(u(rng));
        for (int i = 0; i < 8; ++i) cs.hand_probs.push_back(u(rng));
        cs.face_probs[0] = cs.hand_probs[0] = 0.9;
        double a = 0.0, b = 0.0;
        int na = 0, nb = 0;
        for (int i = 0; i < 10; ++i) {
            if (cs.face_probs[i] <= 0.5) continue;
            double best = 1e300;
            for (int j = 0; j < 8; ++j)
                if (cs.hand_probs[j] > 0.5) best = std::min(best, (f[i] - h[j]).squaredNorm());
            a += best;
            ++na;
        }
        for (int j = 0; j < 8; ++j) {
            if (cs.hand_probs[j] <= 0.5) continue;
            double best = 1e300;
            for (int i = 0; i < 10; ++i)
                if (cs.face_probs[i] > 0.5) best = std::min(best, (f[i] - h[j]).squaredNorm());
            b += best;
            ++nb;
        }
        const auto l = loss_touch(f, h, cs);
        CHECK(l.value == doctest::Approx(a / na + b / nb).epsilon(1e-12));
        const ContactSet swapped{cs.hand_probs, cs.face_probs};
        CHECK(loss_touch(h, f, swapped).value == doctest::Approx(l.value).epsilon(1e-12));
        const auto as = assign_touch(f, h, cs);
        CHECK(fd_error(f, l.grad_face, [&](const Points& x) { return loss_touch_assigned(x, h, as).value; }) < 1e-4);
        CHECK(fd_error(h, l.grad_hand, [&](const Points& x) { return loss_touch_assigned(f, x, as).value; }) < 1e-4);
    }
}

TEST_CASE("loss_collision: examples") {
    const auto face = testsupport::grid(4, 4, 0.01);
    // Close the examples on an open patch: sign falls back to the normal test.
    const auto& fv = face.vertices();
    const Points zero(fv.size(), Vec3::Zero());
    const auto map = stiffness::uniform_stiffness(face, 0.5);
    const auto rest = RestData::from(face, fv);
    const auto clean = loss_collision(Points{{0.02, 0.02, 0.05}}, fv, face, zero, zero, map, rest);
    CHECK(clean.value == doctest::Approx(0.0).scale(1.0));

    // Hand vertex 5 mm below the patch; nearest grid vertex at horizontal 3.3166 mm gives 6 mm total.
    const double lateral = std::sqrt(0.006 * 0.006 - 0.005 * 0.005);
    const Points hand{{0.02 + lateral, 0.02, -0.005}};
    const auto pen = loss_collision(hand, fv, face, zero, zero, map, rest);
    CHECK(pen.penetration_term == doctest::Approx(3.6e-5).epsilon(1e-9));

    const auto seg = geom::build_topology({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
    const auto seg_rest = RestData::from(seg, seg.vertices());
    Points stretched = seg.vertices();
    stretched[1] = {1.1, 0, 0};
    stiffness::StiffnessMap sm{{0.5, 0.5, 0.5}, {0.5, 0.0, 0.0}, {}};
    const Points z3(3, Vec3::Zero());
    const auto rd = loss_regdef(seg, stretched, z3, z3, sm, seg_rest);
    CHECK(rd.edge_term == doctest::Approx(0.005).epsilon(1e-9));
}

TEST_CASE("loss_regdef and penetration gradients match finite differences") {
    std::mt19937_64 rng(4);
    const auto face = testsupport::sphere(1, 0.1);
    const auto rest = RestData::from(face, face.vertices());
    std::vector<double> s(face.vertex_count());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : s) v = u(rng);
    const auto map = stiffness::derive_edge_bend_stiffness(face, s);
    std::normal_distribution<double> n(0.0, 0.003);
    for (int trial = 0; trial < 5; ++trial) {
        Points p(face.vertex_count()), p0(face.vertex_count());
        for (auto& v : p) v = Vec3(n(rng), n(rng), n(rng));
        for (auto& v : p0) v = Vec3(n(rng), n(rng), n(rng));
        const Points def = model::compose_deformed(face.vertices(), p);
        const auto l = loss_regdef(face, def, p, p0, map, rest);
        CHECK(fd_error(def, l.grad_vertices,
                       [&](const Points& x) { return loss_regdef(face, x, p, p0, map, rest).value - l.anchor_term; }) <
              1e-4);
        CHECK(fd_error(p, l.grad_deformation,
                       [&](const Points& x) { return loss_regdef(face, def, x, p0, map, rest).anchor_term; }) < 1e-4);

        auto hand = testsupport::random_points(rng, 30, -0.12, 0.12);
        const auto a = assign_collision(face, def, hand);
        const auto pen = loss_penetration_assigned(def, hand, a);
        CHECK(fd_error(hand, pen.grad_hand, [&](const Points& x) { return loss_penetration_assigned(def, x, a).value; }) <
              1e-4);
        CHECK(fd_error(def, pen.grad_face, [&](const Points& x) { return loss_penetration_assigned(x, hand, a).value; }) <
              1e-4);
    }
}

TEST_CASE("depth_weights: examples and affine invariance") {
    CHECK(depth_weights(std::vector<double>{0, 5, 10}) == std::vector<double>{1.0, 0.5, 0.0});
    CHECK(depth_weights(std::vector<double>{3, 3}) == std::vector<double>{1.0, 1.0});
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 20.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> eta(7), scaled(7);
        for (std::size_t i = 0; i < 7; ++i) {
            eta[i] = u(rng);
            scaled[i] = 3.5 * eta[i] - 2.0;
        }
        const auto w = depth_weights(eta);
        const auto ws = depth_weights(scaled);
        const auto amin = std::min_element(eta.begin(), eta.end()) - eta.begin();
        CHECK(w[static_cast<std::size_t>(amin)] == 1.0);
        for (std::size_t i = 0; i < 7; ++i) CHECK(w[i] == doctest::Approx(ws[i]).epsilon(1e-12));
    }
}

TEST_CASE("loss_depth: examples and gradients") {
    Points lm(21, Vec3(0.0, 0.0, 0.5));
    PriorSampleSet one{{Points(21, Vec3(0, 0, 0.5))}, {0.0}};
    CHECK(loss_depth(lm, one, std::vector<double>{1.0}, Vec3::Zero(), Vec3::Zero()).value == 0.0);
    PriorSampleSet gap{{Points(21, Vec3(0, 0, 0.4))}, {0.0}};
    CHECK(loss_depth(lm, gap, std::vector<double>{1.0}, Vec3::Zero(), Vec3::Zero()).value ==
          doctest::Approx(0.21).epsilon(1e-12));
    PriorSampleSet two{{Points(21, Vec3(0, 0, 0.4)), Points(21, Vec3(0, 0, 0.0))}, {0.0, 1.0}};
    CHECK(loss_depth(lm, two, std::vector<double>{1.0, 0.0}, Vec3::Zero(), Vec3::Zero()).value ==
          doctest::Approx(0.21).epsilon(1e-12));

    std::mt19937_64 rng(6);
    PriorSampleSet ps;
    for (int i = 0; i < 4; ++i) {
        ps.samples.push_back(testsupport::random_points(rng, 3, -0.1, 0.1));
        ps.latent_norms.push_back(i);
    }
    const auto w = depth_weights(ps.latent_norms);
    auto hl = testsupport::random_points(rng, 3, 0.4, 0.6);
    const Vec3 r(0.2, -0.3, 0.1), t(0.01, 0.02, 0.55);
    const auto l = loss_depth(hl, ps, w, r, t);
    CHECK(fd_error(hl, l.grad_landmarks, [&](const Points& x) { return loss_depth(x, ps, w, r, t).value; }) < 1e-4);
    const Points rt{r, t};
    CHECK(fd_error(rt, Points{l.grad_rotation, l.grad_translation},
                   [&](const Points& x) { return loss_depth(hl, ps, w, x[0], x[1]).value; }) < 1e-4);
}

TEST_CASE("training losses") {
    const std::vector<double> gf{1, 0, 1}, gh{0, 1};
    CHECK(train_loss_labels(gf, gh, gf, gh) <= 2.0 * 2e-7);
    const std::vector<double> half3(3, 0.5), half2(2, 0.5);
    CHECK(train_loss_labels(half3, half2, gf, gh) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> pf(6), ph(4), yf(6), yh(4);
    for (auto* v : {&pf, &ph})
        for (auto& x : *v) x = u(rng);
    for (auto* v : {&yf, &yh})
        for (auto& x : *v) x = u(rng) > 0.5 ? 1.0 : 0.0;
    double oracle = 0.0;
    for (int i = 0; i < 6; ++i) oracle += -(yf[i] * std::log(pf[i]) + (1 - yf[i]) * std::log(1 - pf[i])) / 6;
    for (int i = 0; i < 4; ++i) oracle += -(yh[i] * std::log(ph[i]) + (1 - yh[i]) * std::log(1 - ph[i])) / 4;
    CHECK(train_loss_labels(pf, ph, yf, yh) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK_THROWS_AS(train_loss_labels(pf, ph, yh, yf), Error);

    CHECK(train_loss_def(Points{{0.05, 0, 0}}, Points{{0.05, 0, 0}}) == 0.0);
    CHECK(train_loss_def(Points{{0.05, 0, 0}}, Points{{0, 0, 0}}) == doctest::Approx(7.5e-4));
    CHECK(train_loss_def(Points{{0, 0.2, 0}}, Points{{0, 0.2, 0}}) == doctest::Approx(0.2));
}

TEST_CASE("merge_union keeps the larger displacement and ORs labels") {
    InteractionEstimate a{{Vec3(0.001, 0, 0), Vec3(0, 0, 0), Vec3(0, 0.002, 0)}, {{0.9, 0.1, 0.2}, {0.0, 0.7}}};
    InteractionEstimate b{{Vec3(0, 0.0005, 0), Vec3(0, 0, -0.003), Vec3(0.002, 0, 0)}, {{0.2, 0.6, 0.1}, {0.8, 0.3}}};
    const auto m = merge_union(a, b);
    CHECK(m.deformation[0] == a.deformation[0]);
    CHECK(m.deformation[1] == b.deformation[1]);
    CHECK(m.deformation[2] == a.deformation[2]); // tie keeps the first
    CHECK(m.contacts.face_effective() == std::vector<int>{0, 1});
    CHECK(m.contacts.hand_effective() == std::vector<int>{0, 1});
    InteractionEstimate c = a;
    c.deformation.pop_back();
    CHECK_THROWS_AS(merge_union(a, c), Error);
}
