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

#include "defcap/app/json_util.hpp"
#include "defcap/fit/objective.hpp"
#include "defcap/stiffness/stiffness.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace defcap::app {

inline constexpr const char* kSequenceFormat = "defcap-sequence/1";

/// Zero-padded per-frame file stem, e.g. "frame_0007".
std::string frame_stem(std::size_t frame);

json points_to_json(std::span<const Vec3> points);
Points points_from_json(const json& j, const std::string& what);

json stiffness_to_json(const stiffness::StiffnessMap& map);
stiffness::StiffnessMap stiffness_from_json(const json& j, const std::string& what);

/// {"frames": [{"face": params, "hand": params}, ...]}
json params_sequence_to_json(std::span<const model::ModelParams> face, std::span<const model::ModelParams> hand);
void params_sequence_from_json(const json& j, const model::DeformableModel& face_model,
                               const model::DeformableModel& hand_model, std::vector<model::ModelParams>& face,
                               std::vector<model::ModelParams>& hand);

struct FrameContacts {
    bool contact = false;
    std::vector<double> face_probs;
    std::vector<double> hand_probs;
};
json contacts_to_json(std::span<const FrameContacts> frames);
std::vector<FrameContacts> contacts_from_json(const json& j);

json observations_to_json(std::span<const fit::FrameObservation> frames);
/// Fills keypoints and confidences of frames (resized to the file's frame count).
void observations_from_json(const json& j, std::vector<fit::FrameObservation>& frames);

json priors_to_json(std::span<const fit::PriorSampleSet> frames);
std::vector<fit::PriorSampleSet> priors_from_json(const json& j);

/// Per-frame geometry on disk. Paths in the index are relative to its directory.
struct SequenceFrame {
    std::string reference;    // face without interaction deformation
    std::string deformed;     // face with deformation
    std::string hand;         // may be empty
    std::string displacement; // JSON sidecar {"displacement": [[x, y, z], ...]}
};

struct SequenceIndex {
    std::string face_topology; // OBJ whose triangles every face frame shares
    std::string contacts;      // may be empty
    std::vector<SequenceFrame> frames;
};

/// Writes sequence.json in dir.
void write_sequence_index(const fs::path& dir, const SequenceIndex& index);
SequenceIndex read_sequence_index(const fs::path& dir);

enum class FaceVariant { deformed, reference };
FaceVariant parse_face_variant(const std::string& name);

struct LoadedSequence {
    geom::TriMesh face_mesh;
    std::vector<Points> face;
    std::vector<Points> hand;
    std::vector<Points> displacement;
    std::vector<FrameContacts> contacts; // empty when the index names none
    std::vector<fs::path> files;         // everything read
};

/// The reference variant carries zero displacement fields.
LoadedSequence load_sequence(const fs::path& dir, FaceVariant variant);

/// Writes displacement sidecar JSON.
void write_displacement(const fs::path& path, std::span<const Vec3> displacement);
Points read_displacement(const fs::path& path);

} // namespace defcap::app
