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
#include "defcap/metrics/metrics.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace defcap;
using namespace defcap::metrics;

namespace {

std::vector<SceneFrame> shifted(const std::vector<SceneFrame>& in, const Vec3& d) {
    auto out = in;
    for (auto& f : out) {
        for (auto& p : f.face) p += d;
        for (auto& p : f.hand) p += d;
    }
    return out;
}

std::vector<SceneFrame> random_scene(std::mt19937_64& rng, int frames, int nf, int nh) {
    std::vector<SceneFrame> out(static_cast<std::size_t>(frames));
    for (auto& f : out) {
        f.face = testsupport::random_points(rng, static_cast<std::size_t>(nf), -0.1, 0.1);
        f.hand = testsupport::random_points(rng, static_cast<std::size_t>(nh), -0.1, 0.1);
    }
    return out;
}

} // namespace

TEST_CASE("pve: identical, uniform offset, scalar oracle") {
    std::mt19937_64 rng(1);
    const auto gt = random_scene(rng, 3, 6, 4);
    CHECK(pve(gt, gt, false) == 0.0);
    const auto off = shifted(gt, {0, 0, 0.01});
    CHECK(pve(off, gt, false) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(pve(off, gt, true) < 1e-9);

    const auto pred = random_scene(rng, 3, 6, 4);
    double sum = 0.0;
    int n = 0;
    for (std::size_t t = 0; t < 3; ++t) {
        Vec3 cp = Vec3::Zero(), cg = Vec3::Zero();
        for (int i = 0; i < 6; ++i) {
            cp += pred[t].face[i] / 6.0;
            cg += gt[t].face[i] / 6.0;
        }
        for (int i = 0; i < 6; ++i, ++n) sum += ((pred[t].face[i] - cp) - (gt[t].face[i] - cg)).norm();
        for (int i = 0; i < 4; ++i, ++n) sum += ((pred[t].hand[i] - cp) - (gt[t].hand[i] - cg)).norm();
    }
    CHECK(pve(pred, gt, true) == doctest::Approx(1000.0 * sum / n).epsilon(1e-12));
    CHECK_THROWS_AS(pve(pred, std::vector<SceneFrame>(2), false), Error);
}

TEST_CASE("defe: examples and empty filter") {
    const std::vector<Points> zero{Points(2, Vec3::Zero())};
    const std::vector<Points> seven{Points(2, Vec3(0, 0.007, 0))};
    CHECK(*defe(zero, zero, false) == 0.0);
    CHECK(*defe(zero, seven, false) == doctest::Approx(7.0));
    CHECK(*defe(zero, seven, true) == doctest::Approx(7.0));
    const std::vector<Points> mixed{{Vec3(0.003, 0, 0), Vec3(0, 0, 0.008)}};
    CHECK(*defe(zero, mixed, false) == doctest::Approx(5.5));
    CHECK(*defe(zero, mixed, true) == doctest::Approx(8.0));
    CHECK_FALSE(defe(zero, zero, true).has_value());
}

TEST_CASE("collision_metrics: examples") {
    const auto face = testsupport::sphere(2, 0.1);
    std::vector<Points> faces(4, face.vertices());
    std::vector<Points> hands(4, Points(100, Vec3(0.3, 0, 0)));
    auto far = collision_metrics(hands, face, faces);
    CHECK(far.col_dist == 0.0);
    CHECK(far.non_col == 100.0);

    // Vertex 0 of the sphere lies on the surface; move one hand vertex 2 mm
    // inward along a face normal at a face centre so the depth is exact.
    const auto& tri = face.triangles()[0];
    const Vec3 c = (face.vertices()[tri[0]] + face.vertices()[tri[1]] + face.vertices()[tri[2]]) / 3.0;
    const Vec3 n = geom::triangle_normal(face, face.vertices(), 0);
    hands[2][17] = c - 0.002 * n;
    const auto one = collision_metrics(hands, face, faces);
    CHECK(one.non_col == 75.0);
    CHECK(one.col_dist == doctest::Approx(2.0 / (100 * 4)).epsilon(1e-9));
    CHECK_FALSE(one.sign_unreliable);

    for (auto& h : hands) h[0] = Vec3::Zero();
    CHECK(collision_metrics(hands, face, faces).non_col == 0.0);
}

TEST_CASE("touchness: fractions and absence") {
    const auto face = testsupport::sphere(2, 0.1);
    std::vector<Points> faces(3, face.vertices());
    std::vector<Points> hands{Points{{0.103, 0, 0}}, Points{{0.102, 0, 0}}, Points{{0.2, 0, 0}}};
    const std::vector<bool> all{true, true, true};
    CHECK(*touchness(hands, face, faces, all).touchness == doctest::Approx(200.0 / 3.0));
    hands[2][0] = {0.09, 0, 0};
    CHECK(*touchness(hands, face, faces, all).touchness == 100.0);
    for (auto& h : hands) h[0] = {0.5, 0, 0};
    CHECK(*touchness(hands, face, faces, all).touchness == 0.0);
    CHECK_FALSE(touchness(hands, face, faces, {false, false, false}).touchness.has_value());
}

TEST_CASE("f_score: table rows and bounds") {
    CHECK(std::abs(f_score(83.6, 96.6) - 89.6) <= 0.05);
    CHECK(std::abs(f_score(64.2, 73.2) - 68.4) <= 0.05);
    CHECK(f_score(100, 100) == 100.0);
    CHECK(f_score(0, 0) == 0.0);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(1e-3, 100.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = u(rng), b = u(rng);
        const double f = f_score(a, b);
        CHECK(f >= std::min(a, b) - 1e-12);
        CHECK(f <= std::max(a, b) + 1e-12);
        CHECK(f <= 0.5 * (a + b) + 1e-12);
    }
    CHECK(f_score(42.0, 42.0) == doctest::Approx(42.0));
}

TEST_CASE("metrics oracles on small instances and frame permutation invariance") {
    std::mt19937_64 rng(3);
    const auto face = testsupport::icosahedron(0.05);
    for (int trial = 0; trial < 20; ++trial) {
        const int frames = 5;
        std::vector<Points> faces, hands;
        std::vector<bool> gt;
        std::normal_distribution<double> n(0.0, 0.002);
        for (int t = 0; t < frames; ++t) {
            Points f = face.vertices();
            for (auto& p : f) p += Vec3(n(rng), n(rng), n(rng));
            faces.push_back(f);
            hands.push_back(testsupport::random_points(rng, 8, -0.07, 0.07));
            gt.push_back(t % 2 == 0);
        }
        // Brute-force scalar recomputation.
        double depth = 0.0;
        int clean = 0, touch = 0, considered = 0;
        for (int t = 0; t < frames; ++t) {
            bool any = false;
            double mind = 1e300;
            for (const auto& h : hands[t]) {
                // Convex face: inside iff behind every face plane; the signed
                // distance is then minus the distance to the surface.
                const auto q = geom::closest_point_brute_force(h, face, faces[t]);
                bool inside = true;
                for (std::size_t k = 0; k < face.triangle_count(); ++k) {
                    const auto& tr = face.triangles()[k];
                    const Vec3 nr = geom::triangle_normal(face, faces[t], k);
                    if (nr.dot(h - faces[t][tr[0]]) >= 0.0) inside = false;
                }
                const double sd = inside ? -std::abs(q.signed_distance) : std::abs(q.signed_distance);
                if (sd < 0.0) {
                    depth += -sd;
                    any = true;
                }
                mind = std::min(mind, sd);
            }
            if (!any) ++clean;
            if (gt[t]) {
                ++considered;
                if (mind < 0.005) ++touch;
            }
        }
        const auto col = collision_metrics(hands, face, faces);
        CHECK(col.col_dist == doctest::Approx(1000.0 * depth / (8 * frames)).epsilon(1e-9));
        CHECK(col.non_col == doctest::Approx(100.0 * clean / frames).epsilon(1e-12));
        const auto tr = touchness(hands, face, faces, gt);
        CHECK(*tr.touchness == doctest::Approx(100.0 * touch / considered).epsilon(1e-12));

        std::vector<Points> rh(hands.rbegin(), hands.rend()), rf(faces.rbegin(), faces.rend());
        std::vector<bool> rg(gt.rbegin(), gt.rend());
        CHECK(collision_metrics(rh, face, rf).col_dist == doctest::Approx(col.col_dist).epsilon(1e-12));
        CHECK(*touchness(rh, face, rf, rg).touchness == *tr.touchness);
    }
}
