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

#include "defcap/geom/query.hpp"
#include "defcap/pbd/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace defcap::fit {

namespace {

constexpr double kContactThreshold = 0.5;
constexpr double kBceEpsilon = 1e-7;
constexpr double kDefWeightZero = 0.3;
constexpr double kDefPsi = 0.1;

std::vector<int> effective(const std::vector<double>& probs) {
    std::vector<int> out;
    for (std::size_t i = 0; i < probs.size(); ++i)
        if (probs[i] > kContactThreshold) out.push_back(static_cast<int>(i));
    return out;
}

// Index in candidates of the point nearest to q; ties keep the earlier candidate.
int nearest(const Vec3& q, std::span<const Vec3> pts, const std::vector<int>& candidates) {
    double best = std::numeric_limits<double>::infinity();
    int best_i = -1;
    for (int c : candidates) {
        const double d = (pts[static_cast<std::size_t>(c)] - q).squaredNorm();
        if (d < best) {
            best = d;
            best_i = c;
        }
    }
    return best_i;
}

void check_probs(const std::vector<double>& p, std::size_t n, const char* what) {
    require(p.size() == n, ErrorCode::invalid_argument,
            std::string(what) + " contact count " + std::to_string(p.size()) + " != vertex count " + std::to_string(n));
    for (double v : p)
        require(v >= 0.0 && v <= 1.0, ErrorCode::invalid_argument, std::string(what) + " contact probability outside [0, 1]");
}

} // namespace

void ContactSet::validate(std::size_t face_vertices, std::size_t hand_vertices) const {
    check_probs(face_probs, face_vertices, "face");
    check_probs(hand_probs, hand_vertices, "hand");
}

std::vector<int> ContactSet::face_effective() const { return effective(face_probs); }
std::vector<int> ContactSet::hand_effective() const { return effective(hand_probs); }

void PriorSampleSet::validate(std::size_t landmark_count) const {
    require(!samples.empty(), ErrorCode::invalid_argument, "prior sample set is empty");
    require(samples.size() == latent_norms.size(), ErrorCode::invalid_argument,
            "prior sample count does not match latent norm count");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        require(samples[i].size() == landmark_count, ErrorCode::invalid_argument,
                "prior sample " + std::to_string(i) + " has the wrong landmark count");
    }
}

PointLoss loss_2d(const model::Camera& camera, std::span<const Vec3> landmarks3d, std::span<const Vec2> reference,
                  std::span<const double> confidences) {
    const auto k = landmarks3d.size();
    require(reference.size() == k && confidences.size() == k, ErrorCode::invalid_argument,
            "2D loss: landmark, reference and confidence counts differ");
    PointLoss out;
    out.grad.assign(k, Vec3::Zero());
    if (k == 0) return out;
    const double inv = 1.0 / static_cast<double>(k);
    for (std::size_t m = 0; m < k; ++m) {
        require(landmarks3d[m].z() > 0.0, ErrorCode::numerical,
                "2D loss: landmark " + std::to_string(m) + " is behind the camera");
        const Vec2 r = camera.project(landmarks3d[m]) - reference[m];
        out.value += inv * confidences[m] * r.squaredNorm();
        out.grad[m] = inv * confidences[m] * 2.0 * camera.project_jacobian(landmarks3d[m]).transpose() * r;
    }
    return out;
}

MotionLoss loss_motion(std::span<const Points> frames, double dt, double lambda_vel, double lambda_acc) {
    require(dt > 0.0, ErrorCode::invalid_argument, "motion loss: dt must be positive");
    MotionLoss out;
    const std::size_t t_count = frames.size();
    out.grad.resize(t_count);
    if (t_count == 0) return out;
    const std::size_t n = frames[0].size();
    for (std::size_t t = 0; t < t_count; ++t) {
        require(frames[t].size() == n, ErrorCode::invalid_argument, "motion loss: vertex count changes over frames");
        out.grad[t].assign(n, Vec3::Zero());
    }
    if (n == 0) return out;
    if (t_count >= 2 && lambda_vel != 0.0) {
        const double scale = lambda_vel / (static_cast<double>((t_count - 1) * n) * dt * dt);
        for (std::size_t t = 0; t + 1 < t_count; ++t) {
            for (std::size_t i = 0; i < n; ++i) {
                const Vec3 d = frames[t + 1][i] - frames[t][i];
                out.velocity_term += scale * d.squaredNorm();
                out.grad[t + 1][i] += 2.0 * scale * d;
                out.grad[t][i] -= 2.0 * scale * d;
            }
        }
    }
    if (t_count >= 3 && lambda_acc != 0.0) {
        const double scale = lambda_acc / (static_cast<double>((t_count - 2) * n) * dt * dt * dt * dt);
        for (std::size_t t = 1; t + 1 < t_count; ++t) {
            for (std::size_t i = 0; i < n; ++i) {
                const Vec3 a = frames[t + 1][i] - 2.0 * frames[t][i] + frames[t - 1][i];
                out.acceleration_term += scale * a.squaredNorm();
                out.grad[t + 1][i] += 2.0 * scale * a;
                out.grad[t][i] -= 4.0 * scale * a;
                out.grad[t - 1][i] += 2.0 * scale * a;
            }
        }
    }
    out.value = out.velocity_term + out.acceleration_term;
    return out;
}

std::pair<double, VecX> coefficient_penalty(const VecX& coeffs, double lambda) {
    return {lambda * coeffs.squaredNorm(), 2.0 * lambda * coeffs};
}

RegLoss loss_reg(const VecX& shape, std::span<const VecX> expressions, std::span<const Points> vertex_frames,
                 double dt, double lambda_beta, double lambda_psi, double lambda_vel, double lambda_acc) {
    RegLoss out;
    const auto frames = vertex_frames.size();
    require(expressions.empty() || expressions.size() == frames, ErrorCode::invalid_argument,
            "regulariser: expression frames do not match vertex frames");
    auto [sv, sg] = coefficient_penalty(shape, lambda_beta);
    out.shape_term = sv * static_cast<double>(frames);
    out.shape_grad = sg * static_cast<double>(frames);
    for (const auto& e : expressions) {
        auto [ev, eg] = coefficient_penalty(e, lambda_psi);
        out.expression_term += ev;
        out.expression_grad.push_back(std::move(eg));
    }
    out.motion = loss_motion(vertex_frames, dt, lambda_vel, lambda_acc);
    out.value = out.shape_term + out.expression_term + out.motion.value;
    return out;
}

TouchAssignment assign_touch(std::span<const Vec3> face, std::span<const Vec3> hand, const ContactSet& contacts) {
    contacts.validate(face.size(), hand.size());
    TouchAssignment a;
    const auto cf = contacts.face_effective();
    const auto ch = contacts.hand_effective();
    if (cf.empty() || ch.empty()) return a;
    a.active = true;
    a.face_to_hand.resize(cf.size());
    a.hand_to_face.resize(ch.size());
    parallel_for(cf.size(), [&](std::size_t k) { a.face_to_hand[k] = {cf[k], nearest(face[static_cast<std::size_t>(cf[k])], hand, ch)}; });
    parallel_for(ch.size(), [&](std::size_t k) { a.hand_to_face[k] = {ch[k], nearest(hand[static_cast<std::size_t>(ch[k])], face, cf)}; });
    return a;
}

PairLoss loss_touch_assigned(std::span<const Vec3> face, std::span<const Vec3> hand, const TouchAssignment& a) {
    PairLoss out;
    out.grad_face.assign(face.size(), Vec3::Zero());
    out.grad_hand.assign(hand.size(), Vec3::Zero());
    if (!a.active) return out;
    const double wf = 1.0 / static_cast<double>(a.face_to_hand.size());
    for (const auto& [i, j] : a.face_to_hand) {
        const Vec3 d = face[static_cast<std::size_t>(i)] - hand[static_cast<std::size_t>(j)];
        out.value += wf * d.squaredNorm();
        out.grad_face[static_cast<std::size_t>(i)] += 2.0 * wf * d;
        out.grad_hand[static_cast<std::size_t>(j)] -= 2.0 * wf * d;
    }
    const double wh = 1.0 / static_cast<double>(a.hand_to_face.size());
    for (const auto& [j, i] : a.hand_to_face) {
        const Vec3 d = face[static_cast<std::size_t>(i)] - hand[static_cast<std::size_t>(j)];
        out.value += wh * d.squaredNorm();
        out.grad_face[static_cast<std::size_t>(i)] += 2.0 * wh * d;
        out.grad_hand[static_cast<std::size_t>(j)] -= 2.0 * wh * d;
    }
    return out;
}

PairLoss loss_touch(std::span<const Vec3> face, std::span<const Vec3> hand, const ContactSet& contacts) {
    return loss_touch_assigned(face, hand, assign_touch(face, hand, contacts));
}

CollisionAssignment assign_collision(const geom::TriMesh& face_mesh, std::span<const Vec3> face,
                                     std::span<const Vec3> hand) {
    require(face.size() == face_mesh.vertex_count(), ErrorCode::invalid_argument,
            "collision: face positions do not match the face mesh");
    const geom::SurfaceIndex index(face_mesh, face);
    const auto set = geom::proximity_set(hand, index, 0.0);
    CollisionAssignment a;
    a.sign_unreliable = set.sign_unreliable;
    a.pairs.resize(set.hits.size());
    std::vector<int> all(face.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    parallel_for(set.hits.size(), [&](std::size_t k) {
        const int h = set.hits[k].first;
        a.pairs[k] = {h, nearest(hand[static_cast<std::size_t>(h)], face, all)};
    });
    return a;
}

PairLoss loss_penetration_assigned(std::span<const Vec3> face, std::span<const Vec3> hand,
                                   const CollisionAssignment& a) {
    PairLoss out;
    out.grad_face.assign(face.size(), Vec3::Zero());
    out.grad_hand.assign(hand.size(), Vec3::Zero());
    for (const auto& [h, f] : a.pairs) {
        const Vec3 d = hand[static_cast<std::size_t>(h)] - face[static_cast<std::size_t>(f)];
        out.value += d.squaredNorm();
        out.grad_hand[static_cast<std::size_t>(h)] += 2.0 * d;
        out.grad_face[static_cast<std::size_t>(f)] -= 2.0 * d;
    }
    return out;
}

RestData RestData::from(const geom::TriMesh& mesh, std::span<const Vec3> positions) {
    return {geom::edge_lengths(mesh, positions), geom::dihedral_angles(mesh, positions)};
}

RegDefLoss loss_regdef(const geom::TriMesh& face_mesh, std::span<const Vec3> deformed,
                       std::span<const Vec3> deformation, std::span<const Vec3> deformation0,
                       const stiffness::StiffnessMap& stiffness, const RestData& rest) {
    const auto n = face_mesh.vertex_count();
    require(deformed.size() == n && deformation.size() == n && deformation0.size() == n, ErrorCode::invalid_argument,
            "regDef: vertex, deformation and initial deformation counts must match the face mesh");
    stiffness.validate(face_mesh);
    require(rest.edge_lengths.size() == face_mesh.edges().size() &&
                rest.dihedral_angles.size() == face_mesh.bend_pairs().size(),
            ErrorCode::invalid_argument, "regDef: rest data does not match the face mesh");
    RegDefLoss out;
    out.grad_vertices.assign(n, Vec3::Zero());
    out.grad_deformation.assign(n, Vec3::Zero());
    for (std::size_t e = 0; e < face_mesh.edges().size(); ++e) {
        const auto [a, b] = face_mesh.edges()[e];
        const Vec3 d = deformed[static_cast<std::size_t>(a)] - deformed[static_cast<std::size_t>(b)];
        const double l = d.norm();
        const double r = l - rest.edge_lengths[e];
        const double s = stiffness.edge_stiffness[e];
        out.edge_term += s * r * r;
        if (l > 0.0) {
            const Vec3 g = 2.0 * s * r * d / l;
            out.grad_vertices[static_cast<std::size_t>(a)] += g;
            out.grad_vertices[static_cast<std::size_t>(b)] -= g;
        }
    }
    for (std::size_t k = 0; k < face_mesh.bend_pairs().size(); ++k) {
        const double phi0 = rest.dihedral_angles[k];
        if (std::isnan(phi0)) continue;
        const auto& bp = face_mesh.bend_pairs()[k];
        const std::array<std::size_t, 4> ids{static_cast<std::size_t>(bp.p1), static_cast<std::size_t>(bp.p2),
                                             static_cast<std::size_t>(bp.p3), static_cast<std::size_t>(bp.p4)};
        const std::array<Vec3, 4> p{deformed[ids[0]], deformed[ids[1]], deformed[ids[2]], deformed[ids[3]]};
        double d = 0.0;
        std::array<Vec3, 4> grad_d;
        if (!pbd::normal_dot_gradient(p, d, grad_d)) continue;
        const double phi = std::acos(std::clamp(d, -1.0, 1.0));
        const double r = phi - phi0;
        const double s = stiffness.bend_stiffness[k];
        out.bend_term += s * r * r;
        const double root_sq = 1.0 - d * d;
        if (root_sq < 1e-12) continue;
        const double coef = -2.0 * s * r / std::sqrt(root_sq);
        for (std::size_t i = 0; i < 4; ++i) out.grad_vertices[ids[i]] += coef * grad_d[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 d = deformation[i] - deformation0[i];
        out.anchor_term += d.squaredNorm();
        out.grad_deformation[i] = 2.0 * d;
    }
    out.value = out.edge_term + out.bend_term + out.anchor_term;
    return out;
}

CollisionLoss loss_collision(std::span<const Vec3> hand, std::span<const Vec3> deformed_face,
                             const geom::TriMesh& face_mesh, std::span<const Vec3> deformation,
                             std::span<const Vec3> deformation0, const stiffness::StiffnessMap& stiffness,
                             const RestData& rest) {
    const auto assignment = assign_collision(face_mesh, deformed_face, hand);
    const auto pen = loss_penetration_assigned(deformed_face, hand, assignment);
    CollisionLoss out;
    out.penetration_term = pen.value;
    out.regdef = loss_regdef(face_mesh, deformed_face, deformation, deformation0, stiffness, rest);
    out.value = out.penetration_term + out.regdef.value;
    out.grad_hand = pen.grad_hand;
    out.grad_face = pen.grad_face;
    for (std::size_t i = 0; i < out.grad_face.size(); ++i) out.grad_face[i] += out.regdef.grad_vertices[i];
    out.grad_deformation = out.regdef.grad_deformation;
    return out;
}

std::vector<double> depth_weights(std::span<const double> latent_norms) {
    require(!latent_norms.empty(), ErrorCode::invalid_argument, "depth weights need at least one sample");
    const auto [lo, hi] = std::minmax_element(latent_norms.begin(), latent_norms.end());
    const double range = *hi - *lo;
    std::vector<double> w(latent_norms.size(), 1.0);
    if (!(range > 0.0)) return w;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::clamp(1.0 - (latent_norms[i] - *lo) / range, 0.0, 1.0);
    return w;
}

DepthLoss loss_depth(std::span<const Vec3> hand_landmarks, const PriorSampleSet& samples,
                     std::span<const double> weights, const Vec3& face_rotation, const Vec3& face_translation) {
    samples.validate(hand_landmarks.size());
    require(weights.size() == samples.samples.size(), ErrorCode::invalid_argument,
            "depth loss: weight count does not match sample count");
    const Mat3 r = model::axis_angle_to_matrix(face_rotation);
    const auto tangents = model::rotation_tangents(face_rotation);
    DepthLoss out;
    out.grad_landmarks.assign(hand_landmarks.size(), Vec3::Zero());
    for (std::size_t i = 0; i < samples.samples.size(); ++i) {
        const double w = weights[i];
        if (w == 0.0) continue;
        for (std::size_t k = 0; k < hand_landmarks.size(); ++k) {
            const Vec3 rx = r * samples.samples[i][k];
            const double diff = hand_landmarks[k].z() - (rx.z() + face_translation.z());
            out.value += w * diff * diff;
            out.grad_landmarks[k].z() += 2.0 * w * diff;
            out.grad_translation.z() -= 2.0 * w * diff;
            for (int m = 0; m < 3; ++m) out.grad_rotation[m] -= 2.0 * w * diff * tangents[static_cast<std::size_t>(m)].cross(rx).z();
        }
    }
    return out;
}

double train_loss_labels(std::span<const double> pred_face, std::span<const double> pred_hand,
                         std::span<const double> gt_face, std::span<const double> gt_hand) {
    require(pred_face.size() == gt_face.size() && pred_hand.size() == gt_hand.size(), ErrorCode::invalid_argument,
            "label loss: prediction and ground-truth sizes differ");
    auto bce = [](std::span<const double> p, std::span<const double> y) {
        if (p.empty()) return 0.0;
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double q = std::clamp(p[i], kBceEpsilon, 1.0 - kBceEpsilon);
            s -= y[i] * std::log(q) + (1.0 - y[i]) * std::log(1.0 - q);
        }
        return s / static_cast<double>(p.size());
    };
    return bce(pred_face, gt_face) + bce(pred_hand, gt_hand);
}

double train_loss_def(std::span<const Vec3> pred, std::span<const Vec3> gt) {
    require(pred.size() == gt.size(), ErrorCode::invalid_argument, "deformation loss: sizes differ");
    if (pred.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t m = 0; m < pred.size(); ++m) {
        const double w = gt[m].norm() == 0.0 ? kDefWeightZero : 1.0;
        const double pn = pred[m].norm();
        s += w * (pred[m] - gt[m]).squaredNorm() + (pn > kDefPsi ? pn : 0.0);
    }
    return s / static_cast<double>(pred.size());
}

InteractionEstimate merge_union(const InteractionEstimate& a, const InteractionEstimate& b) {
    require(a.deformation.size() == b.deformation.size() &&
                a.contacts.face_probs.size() == b.contacts.face_probs.size() &&
                a.contacts.hand_probs.size() == b.contacts.hand_probs.size(),
            ErrorCode::invalid_argument, "merge_union: estimates differ in size");
    InteractionEstimate out = a;
    for (std::size_t i = 0; i < a.deformation.size(); ++i)
        if (b.deformation[i].squaredNorm() > a.deformation[i].squaredNorm()) out.deformation[i] = b.deformation[i];
    for (std::size_t i = 0; i < a.contacts.face_probs.size(); ++i)
        out.contacts.face_probs[i] = std::max(a.contacts.face_probs[i], b.contacts.face_probs[i]);
    for (std::size_t i = 0; i < a.contacts.hand_probs.size(); ++i)
        out.contacts.hand_probs[i] = std::max(a.contacts.hand_probs[i], b.contacts.hand_probs[i]);
    return out;
}

} // namespace defcap::fit
