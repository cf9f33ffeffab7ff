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

#include "defcap/fit/losses.hpp"
#include "defcap/model/deformable_model.hpp"

#include <memory>
#include <string>
#include <vector>

namespace defcap::fit {

struct OptimizerConfig {
    int steps = 300;
    double lr_translation = 1e-2; // m
    double lr_rotation = 1e-2;    // rad, global rotations and joints
    double lr_shape = 1e-2;
    double lr_expression = 1e-2;
    double lr_deformation = 1e-4; // m
    /// Learning rates ramp up linearly over the first warmup_steps steps, then
    /// decay exponentially to final_lr_fraction at the last step.
    int warmup_steps = 20;
    double final_lr_fraction = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.9;
    double epsilon = 1e-8;
    /// Adam epsilon for p; keeps near-zero gradients on untouched vertices from
    /// producing full-size steps.
    double epsilon_deformation = 1e-6;
    /// Stop a window early when the relative objective change over one step
    /// stays below this for 10 steps; 0 disables.
    double tolerance = 0.0;

    void validate() const;
};

struct FitConfig {
    double lambda_touch = 0.1;
    double lambda_col = 1.0;
    double lambda_depth = 3e-3;
    double lambda_beta = 1e-5;
    double lambda_psi = 1e-3;
    double lambda_vel = 3e-4;
    double lambda_acc = 3e-4;
    /// Time unit of the finite differences in the motion terms; 1 gives
    /// per-frame differences.
    double frame_dt = 1.0;
    /// 2D residuals are divided by this many pixels before squaring; 0 uses the camera fx.
    double keypoint_scale = 0.0;
    int window = 5;
    bool optimize_face = true;
    bool optimize_hand = true;
    bool optimize_deformation = true;
    OptimizerConfig optimizer;

    void validate() const;
};

struct FrameObservation {
    std::vector<Vec2> face_keypoints;
    std::vector<double> face_confidence;
    std::vector<Vec2> hand_keypoints;
    std::vector<double> hand_confidence;
    ContactSet contacts;
    PriorSampleSet priors; // empty: depth term inactive for the frame
    Points deformation0;   // p0; empty means zeros
};

struct FitProblem {
    std::shared_ptr<const model::DeformableModel> face_model;
    std::shared_ptr<const model::DeformableModel> hand_model;
    model::Camera camera;
    stiffness::StiffnessMap face_stiffness;
    std::vector<FrameObservation> frames;
    /// Per-frame initial parameters.
    std::vector<model::ModelParams> face_init;
    std::vector<model::ModelParams> hand_init;

    void validate() const;
    /// Frames [begin, end) as a problem of their own.
    FitProblem slice(std::size_t begin, std::size_t end) const;
};

struct FitState {
    std::vector<model::ModelParams> face;
    std::vector<model::ModelParams> hand;
    std::vector<Points> deformation;

    static FitState initial(const FitProblem& problem);
};

/// Unweighted term values summed over the window (2D terms already scaled).
struct TermBreakdown {
    double face_2d = 0.0;
    double hand_2d = 0.0;
    double face_reg = 0.0;
    double hand_reg = 0.0;
    double touch = 0.0;
    double penetration = 0.0;
    double regdef_edge = 0.0;
    double regdef_bend = 0.0;
    double regdef_anchor = 0.0;
    double depth = 0.0;
    double total = 0.0; // weighted objective
    int penetrating = 0;
};

struct ObjectiveValue {
    double value = 0.0;
    VecX gradient;
    TermBreakdown terms;
};

/// Objective over frames [begin, end) of a problem as a function of a flat
/// vector of free variables. Per frame the layout is: face [tau, r, beta,
/// psi, theta], hand [tau, r, beta, psi, theta], deformation p (3M), each block present only
/// when that group is optimized. Nearest-neighbour assignments are frozen by
/// prepare() so that evaluate() is smooth between calls. The deformation
/// regulariser acts on p alone: it measures the initial face surface plus p
/// against the edge lengths and angles of the initial surface plus p0.
class WindowObjective {
public:
    enum class Group { translation, rotation, shape, expression, deformation };

    WindowObjective(const FitProblem& problem, const FitConfig& config, std::size_t begin, std::size_t end);

    std::size_t frame_count() const { return end_ - begin_; }
    Eigen::Index size() const { return size_; }
    const std::vector<Group>& groups() const { return groups_; }

    VecX pack(const FitState& state) const;
    void unpack(const VecX& x, FitState& state) const;

    /// Recomputes touch and collision assignments at x.
    void prepare(const VecX& x);
    ObjectiveValue evaluate(const VecX& x) const;

private:
    struct Frame {
        std::vector<int> face_free; // indices into the packed face parameter vector
        std::vector<int> hand_free;
        Eigen::Index face_offset = -1;
        Eigen::Index hand_offset = -1;
        Eigen::Index p_offset = -1;
        TouchAssignment touch;
        CollisionAssignment collision;
        std::vector<double> depth_weights;
        RestData rest;
        Points rest_vertices; // undeformed face at the initial parameters
        Points p0;
    };

    void layout_frame(Frame& f);
    void frame_geometry(const VecX& x, std::size_t k, model::ModelParams& face, model::ModelParams& hand,
                        Points& p) const;

    const FitProblem& problem_;
    FitConfig config_;
    std::size_t begin_;
    std::size_t end_;
    FitState base_;
    std::vector<Frame> frames_;
    std::vector<Group> groups_;
    Eigen::Index size_ = 0;
};

} // namespace defcap::fit
