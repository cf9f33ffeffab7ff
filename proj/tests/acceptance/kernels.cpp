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

#include "acceptance.hpp"

#include "defcap/fit/losses.hpp"
#include "defcap/metrics/metrics.hpp"
#include "defcap/pbd/solver.hpp"
#include "defcap/stiffness/stiffness.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace acceptance {

using namespace defcap;

Outcome f_score_table() {
    const double ours = metrics::f_score(83.6, 96.6);
    const double bench = metrics::f_score(64.2, 73.2);
    const bool ok = std::abs(ours - 89.6) <= 0.05 && std::abs(bench - 68.4) <= 0.05;
    return {ok, "f(83.6, 96.6) = " + fmt(ours, 6) + " (89.6), f(64.2, 73.2) = " + fmt(bench, 6) + " (68.4), tol 0.05"};
}

Outcome stiffness_formula() {
    const std::vector<double> d{0.0, 0.5, 1.0};
    const auto s = stiffness::stiffness_from_distances(d, 4.0);
    bool ok = s[0] == 1.0 && s[1] == 0.0625 && s[2] == 0.0;
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 0.03);
    std::uniform_int_distribution<int> len(2, 64);
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> dist(static_cast<std::size_t>(len(rng)));
        for (auto& x : dist) x = u(rng);
        const auto st = stiffness::stiffness_from_distances(dist, 4.0);
        for (std::size_t i = 0; i < dist.size(); ++i) {
            if (st[i] < 0.0 || st[i] > 1.0) ++violations;
            for (std::size_t j = 0; j < dist.size(); ++j) {
                if (dist[i] < dist[j] && !(st[i] > st[j])) ++violations;
            }
        }
    }
    ok = ok && violations == 0;
    return {ok, "s(0) = " + fmt(s[0]) + ", s(0.5) = " + fmt(s[1]) + ", s(1) = " + fmt(s[2]) +
                    ", monotonicity/range violations over 1000 vectors: " + std::to_string(violations)};
}

Outcome pbd_stretch() {
    // 10 x 10 cells, every edge a stretch constraint with k = 1 and 20 iterations.
    const auto grid = testsupport::grid(10, 10, 0.01);
    pbd::ConstraintSet cs;
    for (std::size_t e = 0; e < grid.edges().size(); ++e) {
        cs.stretch.push_back({static_cast<int>(e), grid.rest_edge_lengths()[e], 1.0});
    }
    pbd::SolverConfig cfg;
    cfg.iterations = 20;
    auto relative_error = [&](const Points& x) {
        double worst = 0.0;
        for (std::size_t e = 0; e < grid.edges().size(); ++e) {
            const auto [a, b] = grid.edges()[e];
            const double l0 = grid.rest_edge_lengths()[e];
            worst = std::max(worst, std::abs((x[static_cast<std::size_t>(a)] - x[static_cast<std::size_t>(b)]).norm() - l0) / l0);
        }
        return worst;
    };
    // Uniformly stretched by 20 %, then five random in-plane distortions of up to 10 % of the spacing.
    std::vector<Points> starts;
    Points scaled = grid.vertices();
    for (auto& p : scaled) p *= 1.2;
    starts.push_back(scaled);
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> u(-0.001, 0.001);
    for (int k = 0; k < 5; ++k) {
        Points x = grid.vertices();
        for (auto& p : x) p += Vec3(u(rng), u(rng), 0.0);
        starts.push_back(x);
    }
    int worst_steps = 0;
    double initial = 0.0, final_error = 0.0;
    bool ok = true;
    for (const auto& x0 : starts) {
        initial = std::max(initial, relative_error(x0));
        auto state = pbd::SimState::at_rest(x0);
        int reached = -1;
        double err = 0.0;
        for (int s = 1; s <= 50 && reached < 0; ++s) {
            pbd::step(state, grid, cs, {}, cfg);
            err = relative_error(state.positions);
            if (err < 1e-6) reached = s;
        }
        ok = ok && reached > 0;
        worst_steps = std::max(worst_steps, reached < 0 ? 51 : reached);
        final_error = std::max(final_error, err);
    }
    return {ok, std::to_string(starts.size()) + " starts, initial max rel error " + fmt(initial) +
                    ", below 1e-6 after at most " + std::to_string(worst_steps) + " of 50 steps (max error then " +
                    fmt(final_error) + ")"};
}

Outcome pbd_collision() {
    // Sphere of radius 5 cm resting on the plane z = 0, its track targets pushed 8 mm below.
    const auto sphere = testsupport::sphere(2, 0.05, Vec3(0, 0, 0.05));
    const auto plane = geom::build_topology({{-0.5, -0.5, 0}, {0.5, -0.5, 0}, {0.5, 0.5, 0}, {-0.5, 0.5, 0}},
                                            {{0, 1, 2}, {0, 2, 3}});
    const auto map = stiffness::uniform_stiffness(sphere, 0.5);
    pbd::SolverConfig cfg;
    auto state = pbd::SimState::at_rest(sphere.vertices());
    double worst = 0.0, deepest_target = 0.0;
    int contacts = 0;
    for (int frame = 0; frame < 25; ++frame) {
        Points target = sphere.vertices();
        const double push = 0.008 * std::min(1.0, frame / 10.0);
        for (auto& p : target) p.z() -= push;
        for (const auto& p : target) deepest_target = std::min(deepest_target, p.z());
        auto cs = pbd::internal_constraints(sphere, map, sphere.vertices(), cfg.coupling);
        cs.track = pbd::track_constraints(map, target, cfg.coupling);
        const std::vector<pbd::ColliderFrame> col{{&plane, plane.vertices(), {}}};
        contacts += pbd::step(state, sphere, cs, col, cfg).collisions;
        for (const auto& p : state.positions) worst = std::max(worst, -p.z());
    }
    const bool ok = worst <= 1e-5 && contacts > 0;
    return {ok, "targets down to " + fmt(-deepest_target * 1000) + " mm below the plane, max penetration " +
                    fmt(std::max(worst, 0.0)) + " m over 25 frames (<= 1e-5), contacts " + std::to_string(contacts)};
}

// ---- metric oracles -------------------------------------------------------

namespace {

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection 5.1.5).
Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) return a;
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return b;
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + ab * (d1 / (d1 - d3));
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return c;
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + ac * (d2 / (d2 - d6));
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

// Signed distance to a convex closed surface: negative when behind every face plane.
double convex_signed_distance(const Vec3& p, const geom::TriMesh& mesh, const Points& x) {
    double d = 1e300;
    bool inside = true;
    for (const auto& t : mesh.triangles()) {
        const Vec3& a = x[static_cast<std::size_t>(t[0])];
        const Vec3& b = x[static_cast<std::size_t>(t[1])];
        const Vec3& c = x[static_cast<std::size_t>(t[2])];
        d = std::min(d, (p - closest_on_triangle(p, a, b, c)).norm());
        if ((b - a).cross(c - a).dot(p - a) >= 0.0) inside = false;
    }
    return inside ? -d : d;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

Outcome metric_oracles() {
    const auto ico = testsupport::icosahedron(0.05);
    std::mt19937_64 rng(103);
    std::normal_distribution<double> n(0.0, 0.002);
    std::normal_distribution<double> big(0.0, 0.006);
    std::normal_distribution<double> small(0.0, 0.0004);
    std::uniform_real_distribution<double> scale(0.8, 1.2);
    double worst = 0.0;
    int instances = 0;
    for (int trial = 0; trial < 25; ++trial) {
        const int frames = 1 + trial % 5;
        const std::size_t hand_n = 8;
        std::vector<metrics::SceneFrame> pred, gt;
        std::vector<Points> pred_fields, gt_fields, faces, hands;
        std::vector<bool> contact;
        for (int t = 0; t < frames; ++t) {
            // Small vertex noise keeps both surfaces convex.
            metrics::SceneFrame g, p;
            const double k = scale(rng);
            const Vec3 shift(n(rng), n(rng), n(rng));
            Points gf(ico.vertex_count()), pf(ico.vertex_count());
            for (std::size_t i = 0; i < ico.vertex_count(); ++i) {
                gf[i] = Vec3(big(rng), big(rng), big(rng));
                pf[i] = gf[i] + Vec3(n(rng), n(rng), n(rng));
                g.face.push_back(k * ico.vertices()[i] + shift + Vec3(small(rng), small(rng), small(rng)));
                p.face.push_back(g.face.back() + Vec3(small(rng), small(rng), small(rng)));
            }
            g.hand = testsupport::random_points(rng, hand_n, -0.07, 0.07);
            for (const auto& h : g.hand) p.hand.push_back(h + Vec3(n(rng), n(rng), n(rng)));
            gt.push_back(g);
            pred.push_back(p);
            gt_fields.push_back(gf);
            pred_fields.push_back(pf);
            faces.push_back(p.face);
            hands.push_back(p.hand);
            contact.push_back(t % 2 == 0);
        }

        // Brute-force scalars, metres to millimetres at the end.
        double pve = 0.0, pvec = 0.0, defe = 0.0, defe_plus = 0.0, depth = 0.0;
        std::size_t count = 0, plus_count = 0;
        int touching = 0, considered = 0;
        for (int t = 0; t < frames; ++t) {
            const auto& P = pred[static_cast<std::size_t>(t)];
            const auto& G = gt[static_cast<std::size_t>(t)];
            Vec3 cp = Vec3::Zero(), cg = Vec3::Zero();
            for (std::size_t i = 0; i < P.face.size(); ++i) {
                cp += P.face[i];
                cg += G.face[i];
            }
            cp /= static_cast<double>(P.face.size());
            cg /= static_cast<double>(G.face.size());
            for (std::size_t i = 0; i < P.face.size(); ++i) {
                pve += (P.face[i] - G.face[i]).norm();
                pvec += ((P.face[i] - cp) - (G.face[i] - cg)).norm();
            }
            for (std::size_t i = 0; i < P.hand.size(); ++i) {
                pve += (P.hand[i] - G.hand[i]).norm();
                pvec += ((P.hand[i] - cp) - (G.hand[i] - cg)).norm();
            }
            count += P.face.size() + P.hand.size();
            for (std::size_t i = 0; i < P.face.size(); ++i) {
                const double e = (pred_fields[static_cast<std::size_t>(t)][i] - gt_fields[static_cast<std::size_t>(t)][i]).norm();
                defe += e;
                if (gt_fields[static_cast<std::size_t>(t)][i].norm() > 0.005) {
                    defe_plus += e;
                    ++plus_count;
                }
            }
            double mind = 1e300;
            for (const auto& h : P.hand) {
                const double sd = convex_signed_distance(h, ico, P.face);
                if (sd < 0.0) depth += -sd;
                mind = std::min(mind, sd);
            }
            if (contact[static_cast<std::size_t>(t)]) {
                ++considered;
                touching += mind < 0.005 ? 1 : 0;
            }
        }
        const double face_total = static_cast<double>(frames) * static_cast<double>(ico.vertex_count());
        const double exp_pve = 1000.0 * pve / static_cast<double>(count);
        const double exp_pvec = 1000.0 * pvec / static_cast<double>(count);
        const double exp_defe = 1000.0 * defe / face_total;
        const double exp_col = 1000.0 * depth / (static_cast<double>(hand_n) * frames);
        const double exp_touch = 100.0 * touching / considered;

        worst = std::max(worst, rel(metrics::pve(pred, gt, false), exp_pve));
        worst = std::max(worst, rel(metrics::pve(pred, gt, true), exp_pvec));
        worst = std::max(worst, rel(*metrics::defe(pred_fields, gt_fields, false), exp_defe));
        const auto dp = metrics::defe(pred_fields, gt_fields, true);
        if (plus_count > 0) {
            worst = std::max(worst, dp ? rel(*dp, 1000.0 * defe_plus / static_cast<double>(plus_count)) : 1.0);
        } else if (dp) {
            worst = 1.0;
        }
        const auto col = metrics::collision_metrics(hands, ico, faces);
        worst = std::max(worst, depth > 0.0 ? rel(col.col_dist, exp_col) : std::abs(col.col_dist));
        const auto tr = metrics::touchness(hands, ico, faces, contact);
        worst = std::max(worst, tr.touchness ? rel(*tr.touchness, exp_touch) : 1.0);
        ++instances;
    }
    return {worst <= 1e-9, std::to_string(instances) + " instances (12 face + 8 hand vertices, 1-5 frames), worst relative "
                               "deviation of pve/pve_centered/defe/+defe/col_dist/touchness " + fmt(worst)};
}

} // namespace acceptance
