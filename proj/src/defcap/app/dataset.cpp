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

#include "defcap/app/dataset.hpp"

#include "defcap/geom/obj_io.hpp"

#include <cstdio>

namespace defcap::app {

std::string frame_stem(std::size_t frame) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%04zu", frame);
    return buf;
}

json points_to_json(std::span<const Vec3> points) {
    json out = json::array();
    for (const auto& p : points) out.push_back(to_json(p));
    return out;
}

Points points_from_json(const json& j, const std::string& what) {
    require(j.is_array(), ErrorCode::validation, what + " must be an array of points");
    Points out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(vec3_from_json(j[i], what + "[" + std::to_string(i) + "]"));
    return out;
}

namespace {

json doubles(std::span<const double> v) { return json(std::vector<double>(v.begin(), v.end())); }

std::vector<double> doubles_from(const json& j, const std::string& what) {
    const VecX v = vecx_from_json(j, what);
    return {v.data(), v.data() + v.size()};
}

const json& member(const json& j, const std::string& key, const std::string& what) {
    require(j.is_object() && j.contains(key), ErrorCode::validation, what + ": missing \"" + key + "\"");
    return j[key];
}

const json& frames_of(const json& j, const std::string& what) {
    const json& frames = member(j, "frames", what);
    require(frames.is_array(), ErrorCode::validation, what + ": \"frames\" must be an array");
    return frames;
}

} // namespace

json stiffness_to_json(const stiffness::StiffnessMap& map) {
    return {{"vertex_stiffness", doubles(map.vertex_stiffness)},
            {"edge_stiffness", doubles(map.edge_stiffness)},
            {"bend_stiffness", doubles(map.bend_stiffness)}};
}

stiffness::StiffnessMap stiffness_from_json(const json& j, const std::string& what) {
    stiffness::StiffnessMap map;
    map.vertex_stiffness = doubles_from(member(j, "vertex_stiffness", what), what + ".vertex_stiffness");
    map.edge_stiffness = doubles_from(member(j, "edge_stiffness", what), what + ".edge_stiffness");
    map.bend_stiffness = doubles_from(member(j, "bend_stiffness", what), what + ".bend_stiffness");
    return map;
}

json params_sequence_to_json(std::span<const model::ModelParams> face, std::span<const model::ModelParams> hand) {
    require(face.size() == hand.size(), ErrorCode::invalid_argument, "face and hand parameter counts differ");
    json frames = json::array();
    for (std::size_t t = 0; t < face.size(); ++t) {
        frames.push_back({{"face", params_to_json(face[t])}, {"hand", params_to_json(hand[t])}});
    }
    return {{"frames", frames}};
}

void params_sequence_from_json(const json& j, const model::DeformableModel& face_model,
                               const model::DeformableModel& hand_model, std::vector<model::ModelParams>& face,
                               std::vector<model::ModelParams>& hand) {
    const json& frames = frames_of(j, "parameters");
    face.clear();
    hand.clear();
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const std::string what = "parameters.frames[" + std::to_string(t) + "]";
        face.push_back(params_from_json(member(frames[t], "face", what), face_model, what + ".face"));
        hand.push_back(params_from_json(member(frames[t], "hand", what), hand_model, what + ".hand"));
    }
}

json contacts_to_json(std::span<const FrameContacts> frames) {
    json out = json::array();
    for (const auto& f : frames) {
        out.push_back({{"contact", f.contact}, {"face", doubles(f.face_probs)}, {"hand", doubles(f.hand_probs)}});
    }
    return {{"frames", out}};
}

std::vector<FrameContacts> contacts_from_json(const json& j) {
    const json& frames = frames_of(j, "contacts");
    std::vector<FrameContacts> out;
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const std::string what = "contacts.frames[" + std::to_string(t) + "]";
        FrameContacts f;
        const json& c = member(frames[t], "contact", what);
        require(c.is_boolean(), ErrorCode::validation, what + ".contact must be true or false");
        f.contact = c.get<bool>();
        f.face_probs = doubles_from(member(frames[t], "face", what), what + ".face");
        f.hand_probs = doubles_from(member(frames[t], "hand", what), what + ".hand");
        out.push_back(std::move(f));
    }
    return out;
}

namespace {

json keypoints_json(std::span<const Vec2> points, std::span<const double> confidence) {
    json pts = json::array();
    for (const auto& p : points) pts.push_back(to_json(p));
    return {{"keypoints", pts}, {"confidence", doubles(confidence)}};
}

void keypoints_from(const json& j, const std::string& what, std::vector<Vec2>& points, std::vector<double>& confidence) {
    const json& pts = member(j, "keypoints", what);
    require(pts.is_array(), ErrorCode::validation, what + ".keypoints must be an array");
    points.clear();
    for (std::size_t i = 0; i < pts.size(); ++i) points.push_back(vec2_from_json(pts[i], what + ".keypoints"));
    confidence = doubles_from(member(j, "confidence", what), what + ".confidence");
    require(confidence.size() == points.size(), ErrorCode::validation, what + ": keypoint and confidence counts differ");
}

} // namespace

json observations_to_json(std::span<const fit::FrameObservation> frames) {
    json out = json::array();
    for (const auto& f : frames) {
        out.push_back({{"face", keypoints_json(f.face_keypoints, f.face_confidence)},
                       {"hand", keypoints_json(f.hand_keypoints, f.hand_confidence)}});
    }
    return {{"frames", out}};
}

void observations_from_json(const json& j, std::vector<fit::FrameObservation>& frames) {
    const json& in = frames_of(j, "observations");
    frames.resize(in.size());
    for (std::size_t t = 0; t < in.size(); ++t) {
        const std::string what = "observations.frames[" + std::to_string(t) + "]";
        keypoints_from(member(in[t], "face", what), what + ".face", frames[t].face_keypoints, frames[t].face_confidence);
        keypoints_from(member(in[t], "hand", what), what + ".hand", frames[t].hand_keypoints, frames[t].hand_confidence);
    }
}

json priors_to_json(std::span<const fit::PriorSampleSet> frames) {
    json out = json::array();
    for (const auto& f : frames) {
        json samples = json::array();
        for (const auto& s : f.samples) samples.push_back(points_to_json(s));
        out.push_back({{"samples", samples}, {"eta", doubles(f.latent_norms)}});
    }
    return {{"frames", out}};
}

std::vector<fit::PriorSampleSet> priors_from_json(const json& j) {
    const json& frames = frames_of(j, "priors");
    std::vector<fit::PriorSampleSet> out;
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const std::string what = "priors.frames[" + std::to_string(t) + "]";
        fit::PriorSampleSet set;
        const json& samples = member(frames[t], "samples", what);
        require(samples.is_array(), ErrorCode::validation, what + ".samples must be an array");
        for (const auto& s : samples) set.samples.push_back(points_from_json(s, what + ".samples"));
        set.latent_norms = doubles_from(member(frames[t], "eta", what), what + ".eta");
        require(set.latent_norms.size() == set.samples.size(), ErrorCode::validation,
                what + ": sample and eta counts differ");
        out.push_back(std::move(set));
    }
    return out;
}

void write_displacement(const fs::path& path, std::span<const Vec3> displacement) {
    write_json_atomic(path, {{"displacement", points_to_json(displacement)}});
}

Points read_displacement(const fs::path& path) {
    const json j = read_json_file(path);
    return points_from_json(member(j, "displacement", path.string()), path.string() + ".displacement");
}

void write_sequence_index(const fs::path& dir, const SequenceIndex& index) {
    json frames = json::array();
    for (const auto& f : index.frames) {
        json e = {{"reference", f.reference}, {"deformed", f.deformed}, {"displacement", f.displacement}};
        if (!f.hand.empty()) e["hand"] = f.hand;
        frames.push_back(e);
    }
    json out = {{"format", kSequenceFormat},
                {"frame_count", index.frames.size()},
                {"face_topology", index.face_topology},
                {"frames", frames}};
    if (!index.contacts.empty()) out["contacts"] = index.contacts;
    write_json_atomic(dir / "sequence.json", out);
}

SequenceIndex read_sequence_index(const fs::path& dir) {
    const fs::path path = dir / "sequence.json";
    const json j = read_json_file(path);
    const std::string what = path.string();
    ConfigReader r(j, what);
    require(r.string("format", "") == kSequenceFormat, ErrorCode::validation,
            what + ": format must be \"" + std::string(kSequenceFormat) + "\"");
    SequenceIndex index;
    index.face_topology = r.string("face_topology", "");
    require(!index.face_topology.empty(), ErrorCode::validation, what + ": missing face_topology");
    index.contacts = r.string("contacts", "");
    const int count = r.integer("frame_count", -1);
    const json& frames = r.raw("frames");
    require(frames.is_array() && static_cast<int>(frames.size()) == count && count >= 1, ErrorCode::validation,
            what + ": frames must be a non-empty array of frame_count entries");
    r.finish();
    for (std::size_t t = 0; t < frames.size(); ++t) {
        ConfigReader fr(frames[t], what + ".frames[" + std::to_string(t) + "]");
        SequenceFrame f;
        f.reference = fr.string("reference", "");
        f.deformed = fr.string("deformed", "");
        f.hand = fr.string("hand", "");
        f.displacement = fr.string("displacement", "");
        fr.finish();
        require(!f.reference.empty() && !f.deformed.empty() && !f.displacement.empty(), ErrorCode::validation,
                fr.context() + ": reference, deformed and displacement are required");
        index.frames.push_back(std::move(f));
    }
    return index;
}

FaceVariant parse_face_variant(const std::string& name) {
    if (name == "deformed") return FaceVariant::deformed;
    if (name == "reference") return FaceVariant::reference;
    fail(ErrorCode::validation, "face variant must be \"deformed\" or \"reference\", got \"" + name + "\"");
}

LoadedSequence load_sequence(const fs::path& dir, FaceVariant variant) {
    const SequenceIndex index = read_sequence_index(dir);
    LoadedSequence out;
    out.files.push_back(dir / "sequence.json");
    out.files.push_back(dir / index.face_topology);
    out.face_mesh = geom::load_obj_mesh(dir / index.face_topology);
    const std::size_t n = out.face_mesh.vertex_count();
    for (const auto& f : index.frames) {
        const fs::path face_path = dir / (variant == FaceVariant::deformed ? f.deformed : f.reference);
        auto face = geom::read_obj(face_path);
        require(face.vertices.size() == n, ErrorCode::validation,
                face_path.string() + ": vertex count differs from the face topology");
        out.files.push_back(face_path);
        out.face.push_back(std::move(face.vertices));
        if (!f.hand.empty()) {
            out.files.push_back(dir / f.hand);
            out.hand.push_back(geom::read_obj(dir / f.hand).vertices);
        } else {
            out.hand.emplace_back();
        }
        if (variant == FaceVariant::reference) {
            out.displacement.emplace_back(n, Vec3::Zero());
            continue;
        }
        out.files.push_back(dir / f.displacement);
        out.displacement.push_back(read_displacement(dir / f.displacement));
        require(out.displacement.back().size() == n, ErrorCode::validation,
                f.displacement + ": vertex count differs from the face topology");
    }
    if (!index.contacts.empty()) {
        out.files.push_back(dir / index.contacts);
        out.contacts = contacts_from_json(read_json_file(dir / index.contacts));
        require(out.contacts.size() == index.frames.size(), ErrorCode::validation,
                index.contacts + ": frame count differs from the sequence");
    }
    return out;
}

} // namespace defcap::app
