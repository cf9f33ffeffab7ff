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

#include "defcap/model/deformable_model.hpp"

#include <cmath>

namespace defcap::model {

namespace {

struct JointState {
    Mat3 linear;        // A_j
    Vec3 offset;        // b_j
    Vec3 world_pivot;   // W_j = G_parent(c_j)
    std::array<Vec3, 3> world_axes; // A_parent a_k(theta_j)
};

std::vector<JointState> pose_joints(const DeformableModel& model, const VecX& theta) {
    std::vector<JointState> out(model.joints.size());
    for (std::size_t j = 0; j < model.joints.size(); ++j) {
        const auto& joint = model.joints[j];
        const Vec3 r = theta.segment<3>(static_cast<Eigen::Index>(3 * j));
        const Mat3 rj = axis_angle_to_matrix(r);
        Mat3 a_par = Mat3::Identity();
        Vec3 b_par = Vec3::Zero();
        if (joint.parent >= 0) {
            a_par = out[static_cast<std::size_t>(joint.parent)].linear;
            b_par = out[static_cast<std::size_t>(joint.parent)].offset;
        }
        auto& s = out[j];
        s.linear = a_par * rj;
        s.offset = a_par * (joint.pivot - rj * joint.pivot) + b_par;
        s.world_pivot = a_par * joint.pivot + b_par;
        const auto tangents = rotation_tangents(r);
        for (std::size_t k = 0; k < 3; ++k) s.world_axes[k] = a_par * tangents[k];
    }
    return out;
}

Points rest_shape(const DeformableModel& model, const ModelParams& params) {
    const auto n = model.vertex_count();
    VecX flat(static_cast<Eigen::Index>(3 * n));
    const auto& t = model.mesh->vertices();
    for (std::size_t i = 0; i < n; ++i) flat.segment<3>(static_cast<Eigen::Index>(3 * i)) = t[i];
    if (model.shape_count() > 0) flat.noalias() += model.shape_basis * params.shape;
    if (model.expression_count() > 0) flat.noalias() += model.expression_basis * params.expression;
    Points out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = flat.segment<3>(static_cast<Eigen::Index>(3 * i));
    return out;
}

Evaluation evaluate_impl(const DeformableModel& model, const ModelParams& params, bool with_jacobian) {
    model.validate();
    params.validate(model);
    const auto n = model.vertex_count();
    const auto joints = pose_joints(model, params.articulation);
    const Points rest = rest_shape(model, params);
    const Mat3 rg = axis_angle_to_matrix(params.rotation);
    const auto global_axes = rotation_tangents(params.rotation);

    Evaluation ev;
    ev.vertices.resize(n);
    const Eigen::Index cols = model.parameter_count();
    if (with_jacobian) ev.jacobian = MatX::Zero(static_cast<Eigen::Index>(3 * n), cols);
    const Eigen::Index off_s = model.shape_offset();
    const Eigen::Index off_e = model.expression_offset();
    const Eigen::Index off_t = model.articulation_offset();

    for (std::size_t i = 0; i < n; ++i) {
        const auto row = static_cast<Eigen::Index>(3 * i);
        // rest + sum_j w_j (G_j(rest) - rest), exact when every joint is at identity.
        Vec3 skinned = rest[i];
        Mat3 m = Mat3::Identity();
        for (std::size_t j = 0; j < joints.size(); ++j) {
            const double w = model.joints[j].weights[static_cast<Eigen::Index>(i)];
            if (w == 0.0) continue;
            skinned += w * ((joints[j].linear * rest[i] - rest[i]) + joints[j].offset);
            m += w * (joints[j].linear - Mat3::Identity());
        }
        const Vec3 rotated = rg * skinned;
        ev.vertices[i] = rotated + params.translation;
        if (!with_jacobian) continue;

        auto block = [&](Eigen::Index col) { return ev.jacobian.block<3, 1>(row, col); };
        for (int k = 0; k < 3; ++k) {
            ev.jacobian(row + k, k) = 1.0;
            block(3 + k) = global_axes[static_cast<std::size_t>(k)].cross(rotated);
        }
        const Mat3 rm = rg * m;
        if (model.shape_count() > 0) {
            ev.jacobian.block(row, off_s, 3, model.shape_count()) = rm * model.shape_basis.middleRows<3>(row);
        }
        if (model.expression_count() > 0) {
            ev.jacobian.block(row, off_e, 3, model.expression_count()) =
                rm * model.expression_basis.middleRows<3>(row);
        }
        for (std::size_t l = 0; l < joints.size(); ++l) {
            const double w = model.joints[l].weights[static_cast<Eigen::Index>(i)];
            if (w == 0.0) continue;
            const Vec3 g = joints[l].linear * rest[i] + joints[l].offset;
            for (int j = static_cast<int>(l); j >= 0; j = model.joints[static_cast<std::size_t>(j)].parent) {
                const auto& js = joints[static_cast<std::size_t>(j)];
                for (int k = 0; k < 3; ++k) {
                    block(off_t + 3 * j + k) += w * (rg * js.world_axes[static_cast<std::size_t>(k)].cross(g - js.world_pivot));
                }
            }
        }
    }
    return ev;
}

} // namespace

void DeformableModel::validate() const {
    require(mesh != nullptr, ErrorCode::validation, "model '" + name + "' has no template mesh");
    const auto rows = static_cast<Eigen::Index>(3 * vertex_count());
    require(shape_basis.cols() == 0 || shape_basis.rows() == rows, ErrorCode::validation,
            "model '" + name + "': shape basis rows do not match 3 x vertex count");
    require(expression_basis.cols() == 0 || expression_basis.rows() == rows, ErrorCode::validation,
            "model '" + name + "': expression basis rows do not match 3 x vertex count");
    for (std::size_t j = 0; j < joints.size(); ++j) {
        const auto& jt = joints[j];
        require(jt.parent < static_cast<int>(j), ErrorCode::validation,
                "model '" + name + "': joint " + std::to_string(j) + " must come after its parent");
        require(jt.weights.size() == static_cast<Eigen::Index>(vertex_count()), ErrorCode::validation,
                "model '" + name + "': joint " + std::to_string(j) + " weight count mismatch");
        require(jt.weights.minCoeff() >= 0.0 && jt.weights.maxCoeff() <= 1.0, ErrorCode::validation,
                "model '" + name + "': joint " + std::to_string(j) + " weights must lie in [0, 1]");
    }
    if (!joints.empty()) {
        VecX total = VecX::Zero(static_cast<Eigen::Index>(vertex_count()));
        for (const auto& jt : joints) total += jt.weights;
        require(total.maxCoeff() <= 1.0 + 1e-9, ErrorCode::validation,
                "model '" + name + "': skinning weights of a vertex sum to more than 1");
    }
    for (int idx : landmark_indices) {
        require(idx >= 0 && static_cast<std::size_t>(idx) < vertex_count(), ErrorCode::validation,
                "model '" + name + "': landmark index " + std::to_string(idx) + " out of range");
    }
}

ModelParams ModelParams::zeros(const DeformableModel& model) {
    ModelParams p;
    p.shape = VecX::Zero(model.shape_count());
    p.expression = VecX::Zero(model.expression_count());
    p.articulation = VecX::Zero(3 * model.joint_count());
    return p;
}

void ModelParams::validate(const DeformableModel& model) const {
    require(shape.size() == model.shape_count(), ErrorCode::invalid_argument,
            "shape coefficient count " + std::to_string(shape.size()) + " != " + std::to_string(model.shape_count()));
    require(expression.size() == model.expression_count(), ErrorCode::invalid_argument,
            "expression coefficient count " + std::to_string(expression.size()) + " != " +
                std::to_string(model.expression_count()));
    require(articulation.size() == 3 * model.joint_count(), ErrorCode::invalid_argument,
            "articulation count " + std::to_string(articulation.size()) + " != " +
                std::to_string(3 * model.joint_count()));
    require(translation.allFinite() && rotation.allFinite() && shape.allFinite() && expression.allFinite() &&
                articulation.allFinite(),
            ErrorCode::invalid_argument, "non-finite model parameters");
}

VecX ModelParams::pack() const {
    VecX v(6 + shape.size() + expression.size() + articulation.size());
    v << translation, rotation, shape, expression, articulation;
    return v;
}

ModelParams ModelParams::unpack(const DeformableModel& model, const VecX& packed) {
    require(packed.size() == model.parameter_count(), ErrorCode::invalid_argument,
            "packed parameter length " + std::to_string(packed.size()) + " != " +
                std::to_string(model.parameter_count()));
    ModelParams p;
    p.translation = packed.segment<3>(0);
    p.rotation = packed.segment<3>(3);
    p.shape = packed.segment(model.shape_offset(), model.shape_count());
    p.expression = packed.segment(model.expression_offset(), model.expression_count());
    p.articulation = packed.segment(model.articulation_offset(), 3 * model.joint_count());
    return p;
}

Points evaluate(const DeformableModel& model, const ModelParams& params) {
    return evaluate_impl(model, params, false).vertices;
}

Evaluation evaluate_with_jacobian(const DeformableModel& model, const ModelParams& params) {
    return evaluate_impl(model, params, true);
}

Points compose_deformed(std::span<const Vec3> vertices, std::span<const Vec3> deformation) {
    require(vertices.size() == deformation.size(), ErrorCode::invalid_argument,
            "deformation field has " + std::to_string(deformation.size()) + " vectors for " +
                std::to_string(vertices.size()) + " vertices");
    Points out(vertices.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = vertices[i] + deformation[i];
    return out;
}

Points landmarks(const DeformableModel& model, std::span<const Vec3> vertices) {
    Points out;
    out.reserve(model.landmark_indices.size());
    for (int idx : model.landmark_indices) {
        require(idx >= 0 && static_cast<std::size_t>(idx) < vertices.size(), ErrorCode::invalid_argument,
                "landmark index " + std::to_string(idx) + " out of range");
        out.push_back(vertices[static_cast<std::size_t>(idx)]);
    }
    return out;
}

RigidTransform face_frame_transform(const ModelParams& params) {
    return {axis_angle_to_matrix(params.rotation), params.translation};
}

} // namespace defcap::model
