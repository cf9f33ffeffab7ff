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

#include "defcap/metrics/metrics.hpp"

#include "defcap/geom/query.hpp"

#include <algorithm>
#include <limits>

namespace defcap::metrics {

namespace {

void check_frames(std::size_t a, std::size_t b, const char* what) {
    require(a == b, ErrorCode::invalid_argument,
            std::string(what) + ": frame counts differ (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
}

Vec3 centroid(const Points& pts) {
    Vec3 c = Vec3::Zero();
    for (const auto& p : pts) c += p;
    return pts.empty() ? c : Vec3(c / static_cast<double>(pts.size()));
}

// Sum of per-vertex errors of one frame and the vertex count.
std::pair<double, std::size_t> frame_error(const SceneFrame& p, const SceneFrame& g, bool centered, std::size_t t) {
    require(p.face.size() == g.face.size() && p.hand.size() == g.hand.size(), ErrorCode::invalid_argument,
            "frame " + std::to_string(t) + ": vertex counts differ between prediction and ground truth");
    const Vec3 cp = centered ? centroid(p.face) : Vec3::Zero();
    const Vec3 cg = centered ? centroid(g.face) : Vec3::Zero();
    double sum = 0.0;
    for (std::size_t i = 0; i < p.face.size(); ++i) sum += ((p.face[i] - cp) - (g.face[i] - cg)).norm();
    for (std::size_t i = 0; i < p.hand.size(); ++i) sum += ((p.hand[i] - cp) - (g.hand[i] - cg)).norm();
    return {sum, p.face.size() + p.hand.size()};
}

} // namespace

double pve(std::span<const SceneFrame> pred, std::span<const SceneFrame> gt, bool centered) {
    check_frames(pred.size(), gt.size(), "pve");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < pred.size(); ++t) {
        const auto [s, n] = frame_error(pred[t], gt[t], centered, t);
        sum += s;
        count += n;
    }
    require(count > 0, ErrorCode::invalid_argument, "pve: no vertices");
    return kMillimetres * sum / static_cast<double>(count);
}

std::optional<double> defe(std::span<const Points> pred_fields, std::span<const Points> gt_fields, bool plus_only) {
    check_frames(pred_fields.size(), gt_fields.size(), "defe");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < pred_fields.size(); ++t) {
        require(pred_fields[t].size() == gt_fields[t].size(), ErrorCode::invalid_argument,
                "defe: frame " + std::to_string(t) + " field sizes differ");
        for (std::size_t i = 0; i < gt_fields[t].size(); ++i) {
            if (plus_only && !(gt_fields[t][i].norm() > kContactDistance)) continue;
            sum += (pred_fields[t][i] - gt_fields[t][i]).norm();
            ++count;
        }
    }
    if (count == 0) return std::nullopt;
    return kMillimetres * sum / static_cast<double>(count);
}

CollisionMetrics collision_metrics(std::span<const Points> hand_seq, const geom::TriMesh& face_mesh,
                                   std::span<const Points> face_seq) {
    check_frames(hand_seq.size(), face_seq.size(), "collision_metrics");
    CollisionMetrics out;
    const std::size_t frames = hand_seq.size();
    if (frames == 0) return out;
    out.depth_sum_per_frame.assign(frames, 0.0);
    out.penetrating_per_frame.assign(frames, 0);
    std::size_t hand_vertices = 0;
    for (std::size_t t = 0; t < frames; ++t) {
        require(face_seq[t].size() == face_mesh.vertex_count(), ErrorCode::invalid_argument,
                "collision_metrics: face frame " + std::to_string(t) + " does not match the face topology");
        require(t == 0 || hand_seq[t].size() == hand_seq[0].size(), ErrorCode::invalid_argument,
                "collision_metrics: hand vertex count changes at frame " + std::to_string(t));
        const geom::SurfaceIndex index(face_mesh, face_seq[t]);
        const auto set = geom::proximity_set(hand_seq[t], index, 0.0);
        out.sign_unreliable = out.sign_unreliable || set.sign_unreliable;
        for (const auto& [i, q] : set.hits) out.depth_sum_per_frame[t] += -q.signed_distance;
        out.penetrating_per_frame[t] = static_cast<int>(set.hits.size());
        hand_vertices = hand_seq[t].size();
    }
    double total = 0.0;
    int clean = 0;
    for (std::size_t t = 0; t < frames; ++t) {
        total += out.depth_sum_per_frame[t];
        if (out.penetrating_per_frame[t] == 0) ++clean;
    }
    out.col_dist = hand_vertices == 0
                       ? 0.0
                       : kMillimetres * total / (static_cast<double>(hand_vertices) * static_cast<double>(frames));
    out.non_col = 100.0 * clean / static_cast<double>(frames);
    return out;
}

TouchnessResult touchness(std::span<const Points> hand_seq, const geom::TriMesh& face_mesh,
                          std::span<const Points> face_seq, const std::vector<bool>& gt_contact) {
    check_frames(hand_seq.size(), face_seq.size(), "touchness");
    check_frames(hand_seq.size(), gt_contact.size(), "touchness contact flags");
    TouchnessResult out;
    const std::size_t frames = hand_seq.size();
    out.min_distance_per_frame.assign(frames, std::numeric_limits<double>::infinity());
    out.touching_per_frame.assign(frames, false);
    int considered = 0;
    int touching = 0;
    for (std::size_t t = 0; t < frames; ++t) {
        require(face_seq[t].size() == face_mesh.vertex_count(), ErrorCode::invalid_argument,
                "touchness: face frame " + std::to_string(t) + " does not match the face topology");
        const geom::SurfaceIndex index(face_mesh, face_seq[t]);
        std::vector<double> d(hand_seq[t].size());
        parallel_for(d.size(), [&](std::size_t i) { d[i] = index.signed_query(hand_seq[t][i]).signed_distance; });
        for (double v : d) out.min_distance_per_frame[t] = std::min(out.min_distance_per_frame[t], v);
        out.touching_per_frame[t] = out.min_distance_per_frame[t] < kContactDistance;
        if (gt_contact[t]) {
            ++considered;
            if (out.touching_per_frame[t]) ++touching;
        }
    }
    if (considered > 0) out.touchness = 100.0 * touching / static_cast<double>(considered);
    return out;
}

double f_score(double a, double b) {
    require(a >= 0.0 && b >= 0.0, ErrorCode::invalid_argument, "f_score inputs must be non-negative");
    if (a + b == 0.0) return 0.0;
    return 2.0 * a * b / (a + b);
}

Evaluation evaluate_all(std::span<const SceneFrame> pred, std::span<const SceneFrame> gt,
                        const geom::TriMesh& face_mesh, std::span<const Points> pred_fields,
                        std::span<const Points> gt_fields, const std::vector<bool>& gt_contact) {
    check_frames(pred.size(), gt.size(), "evaluate");
    const std::size_t frames = pred.size();
    Evaluation ev;
    auto& r = ev.report;
    r.pve = pve(pred, gt, false);
    r.pve_centered = pve(pred, gt, true);
    if (!pred_fields.empty() || !gt_fields.empty()) {
        r.defe = defe(pred_fields, gt_fields, false);
        r.defe_plus = defe(pred_fields, gt_fields, true);
    }
    std::vector<Points> hands(frames), faces(frames);
    for (std::size_t t = 0; t < frames; ++t) {
        hands[t] = pred[t].hand;
        faces[t] = pred[t].face;
    }
    const auto col = collision_metrics(hands, face_mesh, faces);
    r.col_dist = col.col_dist;
    r.non_col = col.non_col;
    r.sign_unreliable = col.sign_unreliable;
    const auto touch = touchness(hands, face_mesh, faces, gt_contact);
    r.touchness = touch.touchness;
    if (r.touchness) r.f_score = f_score(r.non_col, *r.touchness);

    ev.frames.resize(frames);
    for (std::size_t t = 0; t < frames; ++t) {
        auto& f = ev.frames[t];
        f.frame = static_cast<int>(t);
        const auto [s, n] = frame_error(pred[t], gt[t], false, t);
        const auto [sc, nc] = frame_error(pred[t], gt[t], true, t);
        f.pve = n ? kMillimetres * s / static_cast<double>(n) : 0.0;
        f.pve_centered = nc ? kMillimetres * sc / static_cast<double>(nc) : 0.0;
        if (!pred_fields.empty() && t < pred_fields.size() && t < gt_fields.size()) {
            f.defe = defe(std::span(pred_fields.subspan(t, 1)), std::span(gt_fields.subspan(t, 1)), false);
        }
        f.col_depth_sum = kMillimetres * col.depth_sum_per_frame[t];
        f.penetrating = col.penetrating_per_frame[t];
        f.min_distance = kMillimetres * touch.min_distance_per_frame[t];
        f.touching = touch.touching_per_frame[t];
        f.gt_contact = gt_contact[t];
    }
    return ev;
}

} // namespace defcap::metrics
