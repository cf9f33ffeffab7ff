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

#include "defcap/geom/mesh.hpp"
#include "defcap/model/camera.hpp"
#include "defcap/model/rotation.hpp"
#include "defcap/stiffness/stiffness.hpp"

#include <span>
#include <utility>
#include <vector>

namespace defcap::fit {

/// Contact probabilities; effective sets are the entries above 0.5.
struct ContactSet {
    std::vector<double> face_probs;
    std::vector<double> hand_probs;

    void validate(std::size_t face_vertices, std::size_t hand_vertices) const;
    std::vector<int> face_effective() const;
    std::vector<int> hand_effective() const;
};

/// Hand landmark candidates in the canonical face frame with their latent norms.
struct PriorSampleSet {
    std::vector<Points> samples;
    std::vector<double> latent_norms;

    void validate(std::size_t landmark_count) const;
};

/// Value and gradient with respect to a list of points.
struct PointLoss {
    double value = 0.0;
    Points grad;
};

/// Confidence-weighted mean squared reprojection error in px^2, averaged
/// over the landmarks.
PointLoss loss_2d(const model::Camera& camera, std::span<const Vec3> landmarks3d, std::span<const Vec2> reference,
                  std::span<const double> confidences);

/// Temporal smoothness of a vertex sequence sampled every dt seconds:
/// lambda_vel * mean |V'|^2 + lambda_acc * mean |V''|^2, means taken over
/// vertices and difference samples. The acceleration term needs 3 frames.
struct MotionLoss {
    double value = 0.0;
    double velocity_term = 0.0;
    double acceleration_term = 0.0;
    std::vector<Points> grad; // per frame
};
MotionLoss loss_motion(std::span<const Points> frames, double dt, double lambda_vel, double lambda_acc);

/// lambda * |coeffs|^2 with gradient.
std::pair<double, VecX> coefficient_penalty(const VecX& coeffs, double lambda);

/// Regularizer of one model over a window: lambda_beta |beta|^2 +
/// lambda_psi |psi_t|^2 per frame, plus the motion term on the vertices.
struct RegLoss {
    double value = 0.0;
    double shape_term = 0.0;
    double expression_term = 0.0;
    MotionLoss motion;
    std::vector<VecX> expression_grad;
    VecX shape_grad;
};
RegLoss loss_reg(const VecX& shape, std::span<const VecX> expressions, std::span<const Points> vertex_frames,
                 double dt, double lambda_beta, double lambda_psi, double lambda_vel, double lambda_acc);

/// Nearest-neighbour pairs of the Chamfer touch term, frozen between updates.
struct TouchAssignment {
    std::vector<std::pair<int, int>> face_to_hand; // (face vertex, nearest hand vertex)
    std::vector<std::pair<int, int>> hand_to_face; // (hand vertex, nearest face vertex)
    bool active = false; // both effective sets nonempty
};
TouchAssignment assign_touch(std::span<const Vec3> face, std::span<const Vec3> hand, const ContactSet& contacts);

struct PairLoss {
    double value = 0.0;
    Points grad_face;
    Points grad_hand;
};
/// Chamfer of squared distances, each direction averaged by its set size.
PairLoss loss_touch_assigned(std::span<const Vec3> face, std::span<const Vec3> hand, const TouchAssignment& a);
PairLoss loss_touch(std::span<const Vec3> face, std::span<const Vec3> hand, const ContactSet& contacts);

/// Penetrating hand vertices (signed distance < 0 to the face surface) with
/// their nearest face vertex, frozen between updates.
struct CollisionAssignment {
    std::vector<std::pair<int, int>> pairs; // (hand vertex, nearest face vertex)
    bool sign_unreliable = false;
};
CollisionAssignment assign_collision(const geom::TriMesh& face_mesh, std::span<const Vec3> face,
                                     std::span<const Vec3> hand);

/// sum over P of |V_h^i - V_f^j|^2.
PairLoss loss_penetration_assigned(std::span<const Vec3> face, std::span<const Vec3> hand,
                                   const CollisionAssignment& a);

/// Rest edge lengths and dihedral angles that L_regDef pulls towards.
struct RestData {
    std::vector<double> edge_lengths;
    std::vector<double> dihedral_angles;
    static RestData from(const geom::TriMesh& mesh, std::span<const Vec3> positions);
};

struct RegDefLoss {
    double value = 0.0;
    double edge_term = 0.0;
    double bend_term = 0.0;
    double anchor_term = 0.0;
    Points grad_vertices;  // with respect to the deformed face V*
    Points grad_deformation; // with respect to p (anchor term only)
};
/// sum s_edge (l - l0)^2 + sum s_bend (phi - phi0)^2 + |p - p0|^2 on V*.
RegDefLoss loss_regdef(const geom::TriMesh& face_mesh, std::span<const Vec3> deformed,
                       std::span<const Vec3> deformation, std::span<const Vec3> deformation0,
                       const stiffness::StiffnessMap& stiffness, const RestData& rest);

struct CollisionLoss {
    double value = 0.0;
    double penetration_term = 0.0;
    RegDefLoss regdef;
    Points grad_face;  // with respect to V*
    Points grad_hand;
    Points grad_deformation;
};
/// L_col = penetration term + L_regDef, with the assignment computed here.
CollisionLoss loss_collision(std::span<const Vec3> hand, std::span<const Vec3> deformed_face,
                             const geom::TriMesh& face_mesh, std::span<const Vec3> deformation,
                             std::span<const Vec3> deformation0, const stiffness::StiffnessMap& stiffness,
                             const RestData& rest);

/// w_i = 1 - (eta_i - min) / (max - min); constant eta gives all 1.
std::vector<double> depth_weights(std::span<const double> latent_norms);

struct DepthLoss {
    double value = 0.0;
    Points grad_landmarks;
    Vec3 grad_rotation = Vec3::Zero();    // face axis-angle
    Vec3 grad_translation = Vec3::Zero(); // face translation
};
/// sum_i w_i sum_k (J_k.z - T(J*_ik).z)^2 with T(x) = R(r) x + tau.
DepthLoss loss_depth(std::span<const Vec3> hand_landmarks, const PriorSampleSet& samples,
                     std::span<const double> weights, const Vec3& face_rotation, const Vec3& face_translation);

/// Sum of the mean binary cross-entropies of face and hand labels,
/// predictions clamped to [1e-7, 1 - 1e-7].
double train_loss_labels(std::span<const double> pred_face, std::span<const double> pred_hand,
                         std::span<const double> gt_face, std::span<const double> gt_hand);

/// (1/M) sum (w_def |p - p_hat|^2 + b_def |p|) with w_def = 0.3 where the
/// ground truth is zero (else 1) and b_def = 1 where |p| > 0.1 m.
double train_loss_def(std::span<const Vec3> pred, std::span<const Vec3> gt);

/// Deformation and contacts estimated for one hand.
struct InteractionEstimate {
    Points deformation;
    ContactSet contacts;
};
/// Union of the estimates of two hands: per vertex the displacement of larger
/// norm (the first on ties) and the larger contact probability.
InteractionEstimate merge_union(const InteractionEstimate& a, const InteractionEstimate& b);

} // namespace defcap::fit
