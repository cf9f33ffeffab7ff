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

#include "defcap/scenario/scenario.hpp"

#include "defcap/geom/query.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace defcap::scenario {

using model::ModelParams;

namespace {

constexpr std::array<const char*, 8> kActionNames{"poke_open_hand", "poke_pointing",  "punch",
                                                  "push_palm",      "rub",            "pinch_chin",
                                                  "touch_nose_front", "touch_nose_side"};
constexpr std::array<const char*, 3> kExpressionNames{"neutral", "open_mouth", "smile"};

double smoothstep(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
}

enum class Region { cheek, chin, nose_tip, nose_side };

struct ActionSpec {
    HandPose pose;
    Vec3 contact_dir; // hand frame, points at the face
    Vec3 up_dir;      // hand frame, aligned with head up
    Region region;
};

ActionSpec action_spec(ActionKind kind) {
    const Vec3 y = Vec3::UnitY();
    const Vec3 z = Vec3::UnitZ();
    switch (kind) {
    case ActionKind::poke_open_hand: return {HandPose::open, y, z, Region::cheek};
    case ActionKind::poke_pointing: return {HandPose::pointing, y, z, Region::cheek};
    case ActionKind::punch: return {HandPose::fist, y, z, Region::cheek};
    case ActionKind::push_palm: return {HandPose::open, -z, y, Region::cheek};
    case ActionKind::rub: return {HandPose::pointing, y, z, Region::cheek};
    case ActionKind::pinch_chin: return {HandPose::pointing, y, z, Region::chin};
    case ActionKind::touch_nose_front: return {HandPose::pointing, y, z, Region::nose_tip};
    case ActionKind::touch_nose_side: return {HandPose::pointing, y, z, Region::nose_side};
    }
    fail(ErrorCode::internal, "unknown action");
}

int target_vertex(const geom::TriMesh& mesh, const Vec3& radii, Region region) {
    const auto& v = mesh.vertices();
    if (region == Region::nose_tip) {
        int best = 0;
        for (std::size_t i = 1; i < v.size(); ++i) {
            if (v[i].z() < v[static_cast<std::size_t>(best)].z()) best = static_cast<int>(i);
        }
        return best;
    }
    Vec2 goal;
    switch (region) {
    case Region::cheek: goal = Vec2(-0.5, -0.2); break;
    case Region::chin: goal = Vec2(0.0, -0.8); break;
    default: goal = Vec2(-0.12, -0.1); break;
    }
    int best = -1;
    double best_d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec3 q = v[i].cwiseQuotient(radii).normalized();
        if (q.z() > -0.2) continue;
        const double d = (q.head<2>() - goal).squaredNorm();
        if (best < 0 || d < best_d) {
            best = static_cast<int>(i);
            best_d = d;
        }
    }
    return best;
}

Mat3 frame_alignment(const Vec3& a1, const Vec3& a2_hint, const Vec3& b1, const Vec3& b2_hint) {
    auto basis = [](const Vec3& first, const Vec3& hint) {
        const Vec3 e1 = first.normalized();
        Vec3 e2 = hint - hint.dot(e1) * e1;
        if (e2.norm() < 1e-9) e2 = e1.unitOrthogonal();
        e2.normalize();
        Mat3 m;
        m << e1, e2, e1.cross(e2);
        return m;
    };
    return basis(b1, b2_hint) * basis(a1, a2_hint).transpose();
}

double phase_press(double x) {
    if (x <= 0.35) return smoothstep(x / 0.35);
    if (x <= 0.65) return 1.0;
    return smoothstep((1.0 - x) / 0.35);
}

} // namespace

const char* to_string(ActionKind kind) { return kActionNames[static_cast<std::size_t>(kind)]; }
const char* to_string(ExpressionKind kind) { return kExpressionNames[static_cast<std::size_t>(kind)]; }

ActionKind parse_action(const std::string& name) {
    for (std::size_t i = 0; i < kActionNames.size(); ++i) {
        if (name == kActionNames[i]) return static_cast<ActionKind>(i);
    }
    fail(ErrorCode::validation, "unknown action kind '" + name + "'");
}

ExpressionKind parse_expression(const std::string& name) {
    for (std::size_t i = 0; i < kExpressionNames.size(); ++i) {
        if (name == kExpressionNames[i]) return static_cast<ExpressionKind>(i);
    }
    fail(ErrorCode::validation, "unknown expression kind '" + name + "'");
}

void Scenario::validate() const {
    require(frame_count >= 1, ErrorCode::validation, "frame_count must be >= 1");
    require(frame_dt > 0.0, ErrorCode::validation, "frame_dt must be positive");
    require(approach_depth >= 0.0 && approach_depth < 0.03, ErrorCode::validation,
            "approach_depth must lie in [0, 0.03) m");
    require(standoff >= 0.0, ErrorCode::validation, "standoff must be >= 0");
    require(min_gap >= 0.0 && (min_gap == 0.0 || approach_depth == 0.0), ErrorCode::validation,
            "min_gap must be >= 0 and needs approach_depth 0");
    require(tangential_speed >= 0.0, ErrorCode::validation, "tangential_speed must be >= 0");
}

void GenerateConfig::validate() const {
    proxies.validate();
    camera.validate();
    require(head_translation.z() > 0.2, ErrorCode::validation, "the head must be at least 0.2 m in front of the camera");
    require(subject_shape_sigma >= 0.0 && keypoint_noise_px >= 0.0, ErrorCode::validation,
            "noise levels must be >= 0");
    require(dropout >= 0.0 && dropout < 1.0, ErrorCode::validation, "dropout must lie in [0, 1)");
    require(prior_samples >= 1, ErrorCode::validation, "prior_samples must be >= 1");
    require(prior_sigma >= 0.0, ErrorCode::validation, "prior_sigma must be >= 0");
    require(contact_distance > 0.0, ErrorCode::validation, "contact_distance must be positive");
    require(tracking.steps_per_frame >= 1, ErrorCode::validation, "steps_per_frame must be >= 1");
    tracking.solver.validate();
}

Trajectory drive_trajectory(const Scenario& scenario, const Proxies& proxies, const GenerateConfig& config) {
    scenario.validate();
    config.validate();
    const auto& face = *proxies.face;
    const auto& hand = *proxies.hand;
    const ActionSpec spec = action_spec(scenario.action);
    const int frames = scenario.frame_count;

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    VecX beta(face.shape_count());
    for (Eigen::Index i = 0; i < beta.size(); ++i) beta[i] = config.subject_shape_sigma * gauss(rng);

    Trajectory tr;
    for (int t = 0; t < frames; ++t) {
        const double x = frames > 1 ? static_cast<double>(t) / (frames - 1) : 0.5;
        ModelParams fp = ModelParams::zeros(face);
        fp.translation = config.head_translation;
        fp.rotation = config.head_rotation;
        fp.shape = beta;
        if (scenario.expression == ExpressionKind::open_mouth) fp.expression[kOpenMouth] = 1.5 * smoothstep(x / 0.3);
        if (scenario.expression == ExpressionKind::smile) fp.expression[kSmile] = 1.5 * smoothstep(x / 0.3);
        tr.reference.push_back(model::evaluate(face, fp));
        tr.face_params.push_back(std::move(fp));
    }

    ModelParams local = ModelParams::zeros(hand);
    local.articulation = hand_pose(hand, spec.pose);
    const Points posed = model::evaluate(hand, local);
    tr.contact_vertex = 0;
    for (std::size_t i = 1; i < posed.size(); ++i) {
        if (posed[i].dot(spec.contact_dir) > posed[static_cast<std::size_t>(tr.contact_vertex)].dot(spec.contact_dir))
            tr.contact_vertex = static_cast<int>(i);
    }
    const Vec3 contact_local = posed[static_cast<std::size_t>(tr.contact_vertex)];

    const int target = target_vertex(*face.mesh, config.proxies.head_radii, spec.region);
    const Mat3 head_rotation = model::axis_angle_to_matrix(config.head_rotation);
    const Vec3 up = head_rotation * Vec3::UnitY();
    const geom::SurfaceIndex first(*face.mesh, tr.reference.front());
    const Vec3 n0 = first.signed_query(tr.reference.front()[static_cast<std::size_t>(target)]).normal;
    const Mat3 hand_rotation = frame_alignment(spec.contact_dir, spec.up_dir, -n0, up);
    const Vec3 tangent = (up - up.dot(n0) * n0).normalized();
    const Vec3 hand_axis_angle = [&] {
        const Eigen::AngleAxisd aa(hand_rotation);
        return Vec3(aa.angle() * aa.axis());
    }();
    const double hold_time = 0.3 * std::max(0, frames - 1) * scenario.frame_dt;

    for (int t = 0; t < frames; ++t) {
        const double x = frames > 1 ? static_cast<double>(t) / (frames - 1) : 0.5;
        const double s = phase_press(x);
        const double slide = scenario.action == ActionKind::rub
                                 ? scenario.tangential_speed * hold_time * smoothstep((x - 0.35) / 0.3)
                                 : 0.0;
        const auto& ref = tr.reference[static_cast<std::size_t>(t)];
        const geom::SurfaceIndex index(*face.mesh, ref);
        const auto q = index.signed_query(ref[static_cast<std::size_t>(target)] + slide * tangent);
        const double h = scenario.standoff * (1.0 - s) + (scenario.min_gap - scenario.approach_depth) * s;
        const Vec3 contact = q.point + h * q.normal;

        ModelParams hp = local;
        hp.rotation = hand_axis_angle;
        hp.translation = contact - hand_rotation * contact_local;
        tr.hand.push_back(model::evaluate(hand, hp));
        tr.hand_params.push_back(std::move(hp));
        tr.press_offset.push_back(h);
        tr.surface_target.push_back(q.point);
    }
    return tr;
}

GeneratedSequence generate(const Scenario& scenario, const Proxies& proxies,
                           const stiffness::StiffnessMap& face_stiffness, const GenerateConfig& config) {
    GeneratedSequence out;
    out.scenario = scenario;
    out.camera = config.camera;
    out.trajectory = drive_trajectory(scenario, proxies, config);
    const auto& face = *proxies.face;
    const auto& hand = *proxies.hand;
    const auto& tr = out.trajectory;
    const std::size_t frames = tr.reference.size();

    const auto sim = pbd::simulate_tracking(*face.mesh, face_stiffness, tr.reference, hand.mesh.get(), tr.hand,
                                            config.tracking);
    out.deformed = sim.deformed;
    out.displacements = sim.displacements;
    out.max_penetration = sim.max_penetration;

    out.face_contacts.resize(frames);
    out.hand_contacts.resize(frames);
    out.contact_frames.assign(frames, 0);
    parallel_for(frames, [&](std::size_t t) {
        const geom::SurfaceIndex hand_index(*hand.mesh, tr.hand[t]);
        const geom::SurfaceIndex face_index(*face.mesh, out.deformed[t]);
        out.face_contacts[t].assign(face.vertex_count(), 0);
        out.hand_contacts[t].assign(hand.vertex_count(), 0);
        for (const auto& [i, q] : geom::proximity_set(out.deformed[t], hand_index, config.contact_distance).hits) {
            out.face_contacts[t][static_cast<std::size_t>(i)] = 1;
        }
        for (const auto& [i, q] : geom::proximity_set(tr.hand[t], face_index, config.contact_distance).hits) {
            out.hand_contacts[t][static_cast<std::size_t>(i)] = 1;
        }
        out.contact_frames[t] = std::any_of(out.face_contacts[t].begin(), out.face_contacts[t].end(),
                                            [](std::uint8_t c) { return c != 0; });
    });

    std::mt19937_64 rng(config.seed + 1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    auto observe = [&](const Points& lms, std::vector<Vec2>& kp, std::vector<double>& conf) {
        kp = model::project(config.camera, lms);
        conf.assign(kp.size(), 1.0);
        for (std::size_t i = 0; i < kp.size(); ++i) {
            kp[i].x() += config.keypoint_noise_px * gauss(rng);
            kp[i].y() += config.keypoint_noise_px * gauss(rng);
            if (config.dropout > 0.0 && uni(rng) < config.dropout) conf[i] = 0.0;
        }
    };
    out.face_keypoints.resize(frames);
    out.face_confidence.resize(frames);
    out.hand_keypoints.resize(frames);
    out.hand_confidence.resize(frames);
    out.priors.resize(frames);
    for (std::size_t t = 0; t < frames; ++t) {
        observe(model::landmarks(face, out.deformed[t]), out.face_keypoints[t], out.face_confidence[t]);
        const Points hand_lms = model::landmarks(hand, tr.hand[t]);
        observe(hand_lms, out.hand_keypoints[t], out.hand_confidence[t]);

        const auto frame = model::face_frame_transform(tr.face_params[t]);
        auto& prior = out.priors[t];
        for (int i = 0; i < config.prior_samples; ++i) {
            const double scale = config.prior_sigma * uni(rng);
            Points sample;
            double eta = 0.0;
            for (const auto& p : hand_lms) {
                const Vec3 noise(scale * gauss(rng), scale * gauss(rng), scale * gauss(rng));
                eta += noise.cwiseAbs().sum();
                sample.push_back(frame.apply_inverse(p) + noise);
            }
            prior.samples.push_back(std::move(sample));
            prior.latent_norms.push_back(eta);
        }
    }
    return out;
}

GeneratedSequence generate(const Scenario& scenario, const GenerateConfig& config) {
    config.validate();
    const Proxies proxies = build_proxies(config.seed, config.proxies);
    const auto& mesh = *proxies.face->mesh;
    const auto map = stiffness::ssd_stiffness(mesh, *proxies.skull, mesh);
    return generate(scenario, proxies, map, config);
}

fit::FitProblem make_fit_problem(const GeneratedSequence& sequence, const Proxies& proxies,
                                 const stiffness::StiffnessMap& face_stiffness) {
    fit::FitProblem p;
    p.face_model = proxies.face;
    p.hand_model = proxies.hand;
    p.camera = sequence.camera;
    p.face_stiffness = face_stiffness;
    p.face_init = sequence.trajectory.face_params;
    p.hand_init = sequence.trajectory.hand_params;
    for (std::size_t t = 0; t < sequence.frame_count(); ++t) {
        fit::FrameObservation obs;
        obs.face_keypoints = sequence.face_keypoints[t];
        obs.face_confidence = sequence.face_confidence[t];
        obs.hand_keypoints = sequence.hand_keypoints[t];
        obs.hand_confidence = sequence.hand_confidence[t];
        obs.contacts.face_probs.assign(sequence.face_contacts[t].begin(), sequence.face_contacts[t].end());
        obs.contacts.hand_probs.assign(sequence.hand_contacts[t].begin(), sequence.hand_contacts[t].end());
        obs.priors = sequence.priors[t];
        obs.deformation0 = sequence.displacements[t];
        p.frames.push_back(std::move(obs));
    }
    return p;
}

} // namespace defcap::scenario
