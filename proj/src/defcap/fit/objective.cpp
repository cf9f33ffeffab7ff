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

#include "defcap/fit/objective.hpp"

#include <cmath>

namespace defcap::fit {

using model::ModelParams;

namespace {

Eigen::Map<const VecX> flat(const Points& pts) {
    return {reinterpret_cast<const double*>(pts.data()), static_cast<Eigen::Index>(3 * pts.size())};
}

void add_at(Points& target, const std::vector<int>& indices, const Points& values, double scale) {
    for (std::size_t k = 0; k < indices.size(); ++k) target[static_cast<std::size_t>(indices[k])] += scale * values[k];
}

void add_all(Points& target, const Points& values, double scale) {
    for (std::size_t i = 0; i < target.size(); ++i) target[i] += scale * values[i];
}

bool has_contacts(const ContactSet& c) { return !c.face_probs.empty() || !c.hand_probs.empty(); }

} // namespace

void OptimizerConfig::validate() const {
    require(steps >= 0, ErrorCode::validation, "optimizer steps must be >= 0");
    require(warmup_steps >= 0, ErrorCode::validation, "warmup_steps must be >= 0");
    require(lr_translation >= 0 && lr_rotation >= 0 && lr_shape >= 0 && lr_expression >= 0 && lr_deformation >= 0,
            ErrorCode::validation, "learning rates must be >= 0");
    require(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0, ErrorCode::validation,
            "final_lr_fraction must lie in (0, 1]");
    require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0 &&
                epsilon_deformation > 0.0, ErrorCode::validation,
            "invalid Adam moments");
    require(tolerance >= 0.0, ErrorCode::validation, "tolerance must be >= 0");
}

void FitConfig::validate() const {
    for (double l : {lambda_touch, lambda_col, lambda_depth, lambda_beta, lambda_psi, lambda_vel, lambda_acc}) {
        require(l >= 0.0 && std::isfinite(l), ErrorCode::validation, "loss weights must be finite and >= 0");
    }
    require(frame_dt > 0.0, ErrorCode::validation, "frame_dt must be positive");
    require(keypoint_scale >= 0.0, ErrorCode::validation, "keypoint_scale must be >= 0");
    require(window >= 1, ErrorCode::validation, "window must be >= 1");
    optimizer.validate();
}

void FitProblem::validate() const {
    require(face_model && hand_model, ErrorCode::validation, "fit problem needs a face and a hand model");
    face_model->validate();
    hand_model->validate();
    camera.validate();
    face_stiffness.validate(*face_model->mesh);
    require(!frames.empty(), ErrorCode::validation, "fit problem has no frames");
    require(face_init.size() == frames.size() && hand_init.size() == frames.size(), ErrorCode::validation,
            "initial parameters must be given for every frame");
    const auto nf = face_model->vertex_count();
    const auto nh = hand_model->vertex_count();
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const auto& f = frames[t];
        const std::string at = "frame " + std::to_string(t) + ": ";
        face_init[t].validate(*face_model);
        hand_init[t].validate(*hand_model);
        require(f.face_keypoints.size() == face_model->landmark_indices.size() &&
                    f.face_confidence.size() == f.face_keypoints.size(),
                ErrorCode::validation, at + "face keypoints do not match the face landmarks");
        require(f.hand_keypoints.size() == hand_model->landmark_indices.size() &&
                    f.hand_confidence.size() == f.hand_keypoints.size(),
                ErrorCode::validation, at + "hand keypoints do not match the hand landmarks");
        if (has_contacts(f.contacts)) f.contacts.validate(nf, nh);
        if (!f.priors.samples.empty()) f.priors.validate(hand_model->landmark_indices.size());
        require(f.deformation0.empty() || f.deformation0.size() == nf, ErrorCode::validation,
                at + "initial deformation does not match the face vertex count");
    }
}

FitProblem FitProblem::slice(std::size_t begin, std::size_t end) const {
    require(begin < end && end <= frames.size() && face_init.size() == frames.size() &&
                hand_init.size() == frames.size(),
            ErrorCode::invalid_argument, "invalid frame range");
    FitProblem out = *this;
    const auto b = static_cast<std::ptrdiff_t>(begin), e = static_cast<std::ptrdiff_t>(end);
    out.frames.assign(frames.begin() + b, frames.begin() + e);
    out.face_init.assign(face_init.begin() + b, face_init.begin() + e);
    out.hand_init.assign(hand_init.begin() + b, hand_init.begin() + e);
    return out;
}

FitState FitState::initial(const FitProblem& problem) {
    FitState s;
    s.face = problem.face_init;
    s.hand = problem.hand_init;
    const auto nf = problem.face_model->vertex_count();
    for (const auto& f : problem.frames) s.deformation.push_back(f.deformation0.empty() ? Points(nf, Vec3::Zero()) : f.deformation0);
    return s;
}

WindowObjective::WindowObjective(const FitProblem& problem, const FitConfig& config, std::size_t begin,
                                 std::size_t end)
    : problem_(problem), config_(config), begin_(begin), end_(end) {
    problem.validate();
    config.validate();
    require(begin < end && end <= problem.frames.size(), ErrorCode::invalid_argument, "invalid frame window");
    base_ = FitState::initial(problem);
    frames_.resize(end - begin);
    for (std::size_t k = 0; k < frames_.size(); ++k) {
        auto& f = frames_[k];
        const std::size_t t = begin + k;
        layout_frame(f);
        f.rest_vertices = model::evaluate(*problem.face_model, base_.face[t]);
        f.p0 = base_.deformation[t];
        f.rest = RestData::from(*problem.face_model->mesh, model::compose_deformed(f.rest_vertices, f.p0));
        if (!problem.frames[t].priors.samples.empty()) f.depth_weights = depth_weights(problem.frames[t].priors.latent_norms);
    }
}

void WindowObjective::layout_frame(Frame& f) {
    const auto& fm = *problem_.face_model;
    const auto& hm = *problem_.hand_model;
    auto rigid = [&](std::vector<int>& idx, const model::DeformableModel& m) {
        for (int i = 0; i < 6; ++i) {
            idx.push_back(i);
            groups_.push_back(i < 3 ? Group::translation : Group::rotation);
        }
        for (int i = 0; i < m.shape_count(); ++i) {
            idx.push_back(m.shape_offset() + i);
            groups_.push_back(Group::shape);
        }
        for (int i = 0; i < m.expression_count(); ++i) {
            idx.push_back(m.expression_offset() + i);
            groups_.push_back(Group::expression);
        }
        for (int i = 0; i < 3 * m.joint_count(); ++i) {
            idx.push_back(m.articulation_offset() + i);
            groups_.push_back(Group::rotation);
        }
    };
    if (config_.optimize_face) {
        f.face_offset = size_;
        rigid(f.face_free, fm);
        size_ += static_cast<Eigen::Index>(f.face_free.size());
    }
    if (config_.optimize_hand) {
        f.hand_offset = size_;
        rigid(f.hand_free, hm);
        size_ += static_cast<Eigen::Index>(f.hand_free.size());
    }
    if (config_.optimize_deformation) {
        f.p_offset = size_;
        const auto n = static_cast<Eigen::Index>(3 * fm.vertex_count());
        groups_.insert(groups_.end(), static_cast<std::size_t>(n), Group::deformation);
        size_ += n;
    }
}

VecX WindowObjective::pack(const FitState& state) const {
    VecX x(size_);
    for (std::size_t k = 0; k < frames_.size(); ++k) {
        const auto& f = frames_[k];
        const std::size_t t = begin_ + k;
        if (f.face_offset >= 0) {
            const VecX full = state.face[t].pack();
            for (std::size_t i = 0; i < f.face_free.size(); ++i) x[f.face_offset + static_cast<Eigen::Index>(i)] = full[f.face_free[i]];
        }
        if (f.hand_offset >= 0) {
            const VecX full = state.hand[t].pack();
            for (std::size_t i = 0; i < f.hand_free.size(); ++i) x[f.hand_offset + static_cast<Eigen::Index>(i)] = full[f.hand_free[i]];
        }
        if (f.p_offset >= 0) x.segment(f.p_offset, 3 * static_cast<Eigen::Index>(state.deformation[t].size())) = flat(state.deformation[t]);
    }
    return x;
}

void WindowObjective::frame_geometry(const VecX& x, std::size_t k, ModelParams& face, ModelParams& hand,
                                     Points& p) const {
    const auto& f = frames_[k];
    const std::size_t t = begin_ + k;
    face = base_.face[t];
    hand = base_.hand[t];
    p = base_.deformation[t];
    if (f.face_offset >= 0) {
        VecX full = face.pack();
        for (std::size_t i = 0; i < f.face_free.size(); ++i) full[f.face_free[i]] = x[f.face_offset + static_cast<Eigen::Index>(i)];
        face = ModelParams::unpack(*problem_.face_model, full);
    }
    if (f.hand_offset >= 0) {
        VecX full = hand.pack();
        for (std::size_t i = 0; i < f.hand_free.size(); ++i) full[f.hand_free[i]] = x[f.hand_offset + static_cast<Eigen::Index>(i)];
        hand = ModelParams::unpack(*problem_.hand_model, full);
    }
    if (f.p_offset >= 0) {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = x.segment<3>(f.p_offset + static_cast<Eigen::Index>(3 * i));
    }
}

void WindowObjective::unpack(const VecX& x, FitState& state) const {
    require(x.size() == size_, ErrorCode::invalid_argument, "variable vector has the wrong length");
    for (std::size_t k = 0; k < frames_.size(); ++k) {
        const std::size_t t = begin_ + k;
        frame_geometry(x, k, state.face[t], state.hand[t], state.deformation[t]);
    }
}

void WindowObjective::prepare(const VecX& x) {
    require(x.size() == size_, ErrorCode::invalid_argument, "variable vector has the wrong length");
    for (std::size_t k = 0; k < frames_.size(); ++k) {
        const auto& obs = problem_.frames[begin_ + k];
        ModelParams fp, hp;
        Points p;
        frame_geometry(x, k, fp, hp, p);
        const Points deformed = model::compose_deformed(model::evaluate(*problem_.face_model, fp), p);
        const Points hand = model::evaluate(*problem_.hand_model, hp);
        auto& f = frames_[k];
        f.touch = (config_.lambda_touch > 0.0 && has_contacts(obs.contacts)) ? assign_touch(deformed, hand, obs.contacts)
                                                                            : TouchAssignment{};
        f.collision = config_.lambda_col > 0.0 ? assign_collision(*problem_.face_model->mesh, deformed, hand)
                                               : CollisionAssignment{};
    }
}

ObjectiveValue WindowObjective::evaluate(const VecX& x) const {
    require(x.size() == size_, ErrorCode::invalid_argument, "variable vector has the wrong length");
    const auto& fm = *problem_.face_model;
    const auto& hm = *problem_.hand_model;
    const auto& cfg = config_;
    const double scale = cfg.keypoint_scale > 0.0 ? cfg.keypoint_scale : problem_.camera.fx;
    const double inv_s2 = 1.0 / (scale * scale);
    const std::size_t frames = frames_.size();

    ObjectiveValue out;
    out.gradient = VecX::Zero(size_);
    auto& terms = out.terms;
    std::vector<ModelParams> fps(frames), hps(frames);
    std::vector<model::Evaluation> fev(frames), hev(frames);
    std::vector<Points> ps(frames), gvf(frames), gvh(frames), gp(frames);
    std::vector<VecX> gface_direct(frames), ghand_direct(frames);

    for (std::size_t k = 0; k < frames; ++k) {
        const auto& f = frames_[k];
        const auto& obs = problem_.frames[begin_ + k];
        frame_geometry(x, k, fps[k], hps[k], ps[k]);
        fev[k] = cfg.optimize_face ? model::evaluate_with_jacobian(fm, fps[k])
                                   : model::Evaluation{model::evaluate(fm, fps[k]), {}};
        hev[k] = cfg.optimize_hand ? model::evaluate_with_jacobian(hm, hps[k])
                                   : model::Evaluation{model::evaluate(hm, hps[k]), {}};
        const Points& vf = fev[k].vertices;
        const Points& vh = hev[k].vertices;
        gvf[k].assign(vf.size(), Vec3::Zero());
        gvh[k].assign(vh.size(), Vec3::Zero());
        gp[k].assign(vf.size(), Vec3::Zero());
        gface_direct[k] = VecX::Zero(fm.parameter_count());
        ghand_direct[k] = VecX::Zero(hm.parameter_count());

        const auto l2f = loss_2d(problem_.camera, model::landmarks(fm, vf), obs.face_keypoints, obs.face_confidence);
        terms.face_2d += inv_s2 * l2f.value;
        add_at(gvf[k], fm.landmark_indices, l2f.grad, inv_s2);
        const auto l2h = loss_2d(problem_.camera, model::landmarks(hm, vh), obs.hand_keypoints, obs.hand_confidence);
        terms.hand_2d += inv_s2 * l2h.value;
        add_at(gvh[k], hm.landmark_indices, l2h.grad, inv_s2);

        {
            const auto [bv, bg] = coefficient_penalty(fps[k].shape, cfg.lambda_beta);
            const auto [ev, eg] = coefficient_penalty(fps[k].expression, cfg.lambda_psi);
            terms.face_reg += bv + ev;
            gface_direct[k].segment(fm.shape_offset(), fm.shape_count()) += bg;
            gface_direct[k].segment(fm.expression_offset(), fm.expression_count()) += eg;
            const auto [hv, hg] = coefficient_penalty(hps[k].shape, cfg.lambda_beta);
            terms.hand_reg += hv;
            ghand_direct[k].segment(hm.shape_offset(), hm.shape_count()) += hg;
        }

        const Points deformed = model::compose_deformed(vf, ps[k]);
        if (cfg.lambda_touch > 0.0 && f.touch.active) {
            const auto t = loss_touch_assigned(deformed, vh, f.touch);
            terms.touch += t.value;
            add_all(gvf[k], t.grad_face, cfg.lambda_touch);
            add_all(gp[k], t.grad_face, cfg.lambda_touch);
            add_all(gvh[k], t.grad_hand, cfg.lambda_touch);
        }
        if (cfg.lambda_col > 0.0) {
            const auto pen = loss_penetration_assigned(deformed, vh, f.collision);
            const auto rd = loss_regdef(*fm.mesh, model::compose_deformed(f.rest_vertices, ps[k]), ps[k], f.p0,
                                        problem_.face_stiffness, f.rest);
            terms.penetration += pen.value;
            terms.penetrating += static_cast<int>(f.collision.pairs.size());
            terms.regdef_edge += rd.edge_term;
            terms.regdef_bend += rd.bend_term;
            terms.regdef_anchor += rd.anchor_term;
            add_all(gvf[k], pen.grad_face, cfg.lambda_col);
            add_all(gp[k], pen.grad_face, cfg.lambda_col);
            add_all(gp[k], rd.grad_vertices, cfg.lambda_col);
            add_all(gp[k], rd.grad_deformation, cfg.lambda_col);
            add_all(gvh[k], pen.grad_hand, cfg.lambda_col);
        }
        if (cfg.lambda_depth > 0.0 && !obs.priors.samples.empty()) {
            const auto d = loss_depth(model::landmarks(hm, vh), obs.priors, f.depth_weights, fps[k].rotation,
                                      fps[k].translation);
            terms.depth += d.value;
            add_at(gvh[k], hm.landmark_indices, d.grad_landmarks, cfg.lambda_depth);
            gface_direct[k].segment<3>(0) += cfg.lambda_depth * d.grad_translation;
            gface_direct[k].segment<3>(3) += cfg.lambda_depth * d.grad_rotation;
        }
    }

    std::vector<Points> face_frames(frames), hand_frames(frames);
    for (std::size_t k = 0; k < frames; ++k) {
        face_frames[k] = fev[k].vertices;
        hand_frames[k] = hev[k].vertices;
    }
    const auto mf = loss_motion(face_frames, cfg.frame_dt, cfg.lambda_vel, cfg.lambda_acc);
    const auto mh = loss_motion(hand_frames, cfg.frame_dt, cfg.lambda_vel, cfg.lambda_acc);
    terms.face_reg += mf.value;
    terms.hand_reg += mh.value;

    for (std::size_t k = 0; k < frames; ++k) {
        const auto& f = frames_[k];
        add_all(gvf[k], mf.grad[k], 1.0);
        add_all(gvh[k], mh.grad[k], 1.0);
        if (f.face_offset >= 0) {
            const VecX g = fev[k].jacobian.transpose() * flat(gvf[k]) + gface_direct[k];
            for (std::size_t i = 0; i < f.face_free.size(); ++i) out.gradient[f.face_offset + static_cast<Eigen::Index>(i)] = g[f.face_free[i]];
        }
        if (f.hand_offset >= 0) {
            const VecX g = hev[k].jacobian.transpose() * flat(gvh[k]) + ghand_direct[k];
            for (std::size_t i = 0; i < f.hand_free.size(); ++i) out.gradient[f.hand_offset + static_cast<Eigen::Index>(i)] = g[f.hand_free[i]];
        }
        if (f.p_offset >= 0) out.gradient.segment(f.p_offset, 3 * static_cast<Eigen::Index>(gp[k].size())) = flat(gp[k]);
    }

    terms.total = terms.face_2d + terms.hand_2d + terms.face_reg + terms.hand_reg + cfg.lambda_touch * terms.touch +
                  cfg.lambda_col * (terms.penetration + terms.regdef_edge + terms.regdef_bend + terms.regdef_anchor) +
                  cfg.lambda_depth * terms.depth;
    out.value = terms.total;
    return out;
}

} // namespace defcap::fit
