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
#include "defcap/model/rotation.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace defcap::model {

/// Rotation about a pivot, applied after its parent's transform.
struct Joint {
    std::string name;
    int parent = -1; // must precede the joint in the list
    Vec3 pivot = Vec3::Zero();
    /// Preferred hinge axis; drivers use it, evaluation does not.
    Vec3 axis = Vec3::UnitX();
    /// Skinning weight per template vertex, in [0, 1].
    VecX weights;
};

/// Rigid transform + linear blendshapes + linear blend skinning:
///   V = R(r) * LBS(T + S beta + E psi, theta) + tau.
struct DeformableModel {
    std::string name;
    std::shared_ptr<const geom::TriMesh> mesh; // template topology and rest vertices
    MatX shape_basis;                            // 3N x S, row 3i + k is coordinate k of vertex i
    MatX expression_basis;                       // 3N x E
    std::vector<Joint> joints;
    std::vector<int> landmark_indices;

    std::size_t vertex_count() const { return mesh ? mesh->vertex_count() : 0; }
    int shape_count() const { return static_cast<int>(shape_basis.cols()); }
    int expression_count() const { return static_cast<int>(expression_basis.cols()); }
    int joint_count() const { return static_cast<int>(joints.size()); }
    /// Length of the packed parameter vector [tau, r, beta, psi, theta].
    int parameter_count() const { return 6 + shape_count() + expression_count() + 3 * joint_count(); }
    int shape_offset() const { return 6; }
    int expression_offset() const { return 6 + shape_count(); }
    int articulation_offset() const { return 6 + shape_count() + expression_count(); }

    void validate() const;
};

struct ModelParams {
    Vec3 translation = Vec3::Zero();
    Vec3 rotation = Vec3::Zero(); // axis-angle
    VecX shape;
    VecX expression;
    VecX articulation; // 3 per joint, axis-angle

    static ModelParams zeros(const DeformableModel& model);
    void validate(const DeformableModel& model) const;
    VecX pack() const;
    static ModelParams unpack(const DeformableModel& model, const VecX& packed);
};

/// Vertices and, optionally, the dense Jacobian dV/dparams (3N x P).
struct Evaluation {
    Points vertices;
    MatX jacobian;
};

Points evaluate(const DeformableModel& model, const ModelParams& params);
Evaluation evaluate_with_jacobian(const DeformableModel& model, const ModelParams& params);

/// V* = V + p.
Points compose_deformed(std::span<const Vec3> vertices, std::span<const Vec3> deformation);

Points landmarks(const DeformableModel& model, std::span<const Vec3> vertices);

/// T(x) = R(r) x + tau, mapping the canonical face frame to the camera frame.
RigidTransform face_frame_transform(const ModelParams& params);

} // namespace defcap::model
