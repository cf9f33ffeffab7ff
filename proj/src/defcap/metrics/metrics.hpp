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

#include <optional>
#include <span>
#include <vector>

namespace defcap::metrics {

/// Millimetres per metre; inputs are metres, reports are millimetres.
inline constexpr double kMillimetres = 1000.0;
/// Touchness and +DefE threshold (m).
inline constexpr double kContactDistance = 0.005;

/// Face and hand vertices of one frame (hand may be empty).
struct SceneFrame {
    Points face;
    Points hand;
};

/// Mean per-vertex error over face and hand vertices of every frame, in mm.
/// Centered: each sequence is translated per frame by its own face centroid.
double pve(std::span<const SceneFrame> pred, std::span<const SceneFrame> gt, bool centered);

/// Mean displacement-vector error in mm. plus_only keeps vertices whose gt
/// norm exceeds 5 mm; absent when nothing passes the filter.
std::optional<double> defe(std::span<const Points> pred_fields, std::span<const Points> gt_fields, bool plus_only);

struct CollisionMetrics {
    /// Sum of penetration depths / (hand vertex count x frame count), mm.
    double col_dist = 0.0;
    /// Percentage of frames without any penetrating hand vertex.
    double non_col = 100.0;
    std::vector<double> depth_sum_per_frame; // m
    std::vector<int> penetrating_per_frame;
    /// Face surface not watertight: signs are normal-direction tests only.
    bool sign_unreliable = false;
};

CollisionMetrics collision_metrics(std::span<const Points> hand_seq, const geom::TriMesh& face_mesh,
                                   std::span<const Points> face_seq);

struct TouchnessResult {
    std::optional<double> touchness; // %, absent without gt-contact frames
    std::vector<double> min_distance_per_frame; // signed, m
    std::vector<bool> touching_per_frame;
};

/// Over frames flagged in gt_contact: share whose minimum hand-to-face signed
/// distance is below 5 mm (penetration counts as touching).
TouchnessResult touchness(std::span<const Points> hand_seq, const geom::TriMesh& face_mesh,
                          std::span<const Points> face_seq, const std::vector<bool>& gt_contact);

/// Harmonic mean 2ab / (a + b); 0 when both are 0.
double f_score(double a, double b);

struct MetricsReport {
    double pve = 0.0;
    double pve_centered = 0.0;
    std::optional<double> defe;
    std::optional<double> defe_plus;
    double col_dist = 0.0;
    double non_col = 100.0;
    std::optional<double> touchness;
    std::optional<double> f_score;
    bool sign_unreliable = false;
};

struct FrameBreakdown {
    int frame = 0;
    double pve = 0.0;          // mm
    double pve_centered = 0.0; // mm
    std::optional<double> defe;
    double col_depth_sum = 0.0; // mm
    int penetrating = 0;
    double min_distance = 0.0; // mm, signed
    bool touching = false;
    bool gt_contact = false;
};

struct Evaluation {
    MetricsReport report;
    std::vector<FrameBreakdown> frames;
};

/// Full suite. Deformation fields may be empty (DefE absent). f_score is
/// absent when touchness is.
Evaluation evaluate_all(std::span<const SceneFrame> pred, std::span<const SceneFrame> gt,
                        const geom::TriMesh& face_mesh, std::span<const Points> pred_fields,
                        std::span<const Points> gt_fields, const std::vector<bool>& gt_contact);

} // namespace defcap::metrics
