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

#include "defcap/fit/objective.hpp"
#include "defcap/model/camera.hpp"
#include "defcap/pbd/solver.hpp"
#include "defcap/scenario/proxies.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace defcap::scenario {

enum class ActionKind {
    poke_open_hand,
    poke_pointing,
    punch,
    push_palm,
    rub,
    pinch_chin,
    touch_nose_front,
    touch_nose_side
};
enum class ExpressionKind { neutral, open_mouth, smile };

const char* to_string(ActionKind kind);
const char* to_string(ExpressionKind kind);
ActionKind parse_action(const std::string& name);
ExpressionKind parse_expression(const std::string& name);

struct Scenario {
    ActionKind action = ActionKind::poke_pointing;
    ExpressionKind expression = ExpressionKind::neutral;
    int frame_count = 30;
    double frame_dt = 0.02;
    /// How far the contact point is driven below the reference surface (m).
    double approach_depth = 0.008;
    /// Gap between contact point and surface at the first and last frame (m).
    double standoff = 0.03;
    /// Closest approach gap for hovering without contact (m); needs approach_depth 0.
    double min_gap = 0.0;
    /// Rub speed along the surface while pressed (m/s); used by rub only.
    double tangential_speed = 0.05;

    void validate() const;
};

inline pbd::SolverConfig default_solver() {
    pbd::SolverConfig c;
    c.damping = 0.2;
    c.skin_offset = 0.001;
    return c;
}

struct GenerateConfig {
    std::uint64_t seed = 7;
    ProxyConfig proxies;
    model::Camera camera;
    Vec3 head_rotation{0.05, 0.15, 0.0};
    Vec3 head_translation{0.0, 0.0, 0.55};
    double subject_shape_sigma = 0.5;
    double keypoint_noise_px = 1.0;
    /// Probability that a landmark gets confidence 0.
    double dropout = 0.0;
    int prior_samples = 100;
    /// Upper bound of the per-sample noise scale for prior samples (m).
    double prior_sigma = 0.01;
    double contact_distance = 0.005;
    pbd::TrackingOptions tracking{default_solver(), 2};

    void validate() const;
};

/// Kinematic part of a scenario: reference face and collider poses per frame.
struct Trajectory {
    std::vector<model::ModelParams> face_params;
    std::vector<model::ModelParams> hand_params;
    std::vector<Points> reference;
    std::vector<Points> hand;
    /// Hand vertex driven against the face.
    int contact_vertex = -1;
    /// Signed offset of the contact vertex along the surface normal per frame (m).
    std::vector<double> press_offset;
    /// Surface point the contact vertex is driven towards, per frame.
    std::vector<Vec3> surface_target;
};

Trajectory drive_trajectory(const Scenario& scenario, const Proxies& proxies, const GenerateConfig& config);

struct GeneratedSequence {
    Scenario scenario;
    model::Camera camera;
    Trajectory trajectory;
    std::vector<Points> deformed;
    std::vector<Points> displacements;
    std::vector<std::vector<std::uint8_t>> face_contacts;
    std::vector<std::vector<std::uint8_t>> hand_contacts;
    std::vector<std::uint8_t> contact_frames;
    std::vector<std::vector<Vec2>> face_keypoints;
    std::vector<std::vector<double>> face_confidence;
    std::vector<std::vector<Vec2>> hand_keypoints;
    std::vector<std::vector<double>> hand_confidence;
    std::vector<fit::PriorSampleSet> priors;
    std::vector<double> max_penetration;

    std::size_t frame_count() const { return deformed.size(); }
};

GeneratedSequence generate(const Scenario& scenario, const Proxies& proxies,
                           const stiffness::StiffnessMap& face_stiffness, const GenerateConfig& config);

/// Builds proxies and SSD stiffness from config, then generates.
GeneratedSequence generate(const Scenario& scenario, const GenerateConfig& config);

/// Fitting problem over a generated sequence with ground-truth initial
/// parameters, contact labels as probabilities and the true displacements as p0.
fit::FitProblem make_fit_problem(const GeneratedSequence& sequence, const Proxies& proxies,
                                 const stiffness::StiffnessMap& face_stiffness);

} // namespace defcap::scenario
