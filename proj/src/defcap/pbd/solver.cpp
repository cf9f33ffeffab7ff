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

#include "defcap/pbd/solver.hpp"

#include "defcap/geom/query.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace defcap::pbd {

namespace {

// Extra band beyond the skin offset in which contacts are generated. They are
// unilateral, so far candidates only activate if a sweep drags them inward.
constexpr double kDetectionMargin = 0.01;

double lerp(double lo, double hi, double s) { return lo + (hi - lo) * std::clamp(s, 0.0, 1.0); }

void check_finite(const SimState& state) {
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (!state.positions[i].allFinite() || !state.velocities[i].allFinite()) {
            fail(ErrorCode::numerical, "non-finite state at vertex " + std::to_string(i));
        }
    }
}

} // namespace

SimState SimState::at_rest(const Points& positions) {
    SimState s;
    s.positions = positions;
    s.prev_positions = positions;
    s.velocities.assign(positions.size(), Vec3::Zero());
    s.inv_mass.assign(positions.size(), 1.0);
    return s;
}

void SimState::validate() const {
    const auto n = positions.size();
    require(prev_positions.size() == n && velocities.size() == n && inv_mass.size() == n, ErrorCode::validation,
            "simulation state arrays differ in length");
    for (std::size_t i = 0; i < n; ++i) {
        require(inv_mass[i] >= 0.0, ErrorCode::validation, "negative inverse mass at vertex " + std::to_string(i));
        require(velocities[i].allFinite(), ErrorCode::validation, "non-finite velocity at vertex " + std::to_string(i));
    }
}

void ConstraintSet::validate(const geom::TriMesh& mesh) const {
    auto unit = [](double k) { return k >= 0.0 && k <= 1.0; };
    for (const auto& c : stretch) {
        require(c.edge >= 0 && static_cast<std::size_t>(c.edge) < mesh.edges().size() && unit(c.stiffness),
                ErrorCode::validation, "invalid stretch constraint on edge " + std::to_string(c.edge));
    }
    for (const auto& c : bend) {
        require(c.bend_pair >= 0 && static_cast<std::size_t>(c.bend_pair) < mesh.bend_pairs().size() &&
                    unit(c.stiffness),
                ErrorCode::validation, "invalid bend constraint on pair " + std::to_string(c.bend_pair));
    }
    for (const auto& c : track) {
        require(c.vertex >= 0 && static_cast<std::size_t>(c.vertex) < mesh.vertex_count() && unit(c.stiffness),
                ErrorCode::validation, "invalid track constraint on vertex " + std::to_string(c.vertex));
    }
    for (const auto& c : collisions) {
        require(c.vertex >= 0 && static_cast<std::size_t>(c.vertex) < mesh.vertex_count() &&
                    std::abs(c.normal.norm() - 1.0) < 1e-9,
                ErrorCode::validation, "invalid collision constraint on vertex " + std::to_string(c.vertex));
    }
}

void SolverConfig::validate() const {
    require(dt > 0.0, ErrorCode::validation, "dt must be positive");
    require(iterations >= 1, ErrorCode::validation, "iterations must be >= 1");
    require(substeps >= 1, ErrorCode::validation, "substeps must be >= 1");
    require(friction_static >= 0.0 && friction_static <= 1.0 && friction_kinetic >= 0.0 && friction_kinetic <= 1.0,
            ErrorCode::validation, "friction coefficients must lie in [0, 1]");
    require(damping >= 0.0 && damping <= 1.0, ErrorCode::validation, "damping must lie in [0, 1]");
    require(skin_offset >= 0.0, ErrorCode::validation, "skin offset must be >= 0");
}

ConstraintSet internal_constraints(const geom::TriMesh& mesh, const stiffness::StiffnessMap& map,
                                   std::span<const Vec3> rest_positions, const StiffnessCoupling& coupling) {
    map.validate(mesh);
    const auto lengths = geom::edge_lengths(mesh, rest_positions);
    const auto angles = geom::dihedral_angles(mesh, rest_positions);
    ConstraintSet set;
    set.stretch.reserve(lengths.size());
    for (std::size_t e = 0; e < lengths.size(); ++e) {
        set.stretch.push_back({static_cast<int>(e), lengths[e],
                               lerp(coupling.stretch_lo, coupling.stretch_hi, map.edge_stiffness[e])});
    }
    set.bend.reserve(angles.size());
    for (std::size_t b = 0; b < angles.size(); ++b) {
        if (std::isnan(angles[b])) continue;
        set.bend.push_back({static_cast<int>(b), angles[b], lerp(coupling.bend_lo, coupling.bend_hi, map.bend_stiffness[b])});
    }
    return set;
}

std::vector<TrackConstraint> track_constraints(const stiffness::StiffnessMap& map, std::span<const Vec3> reference,
                                               const StiffnessCoupling& coupling) {
    require(reference.size() == map.vertex_stiffness.size(), ErrorCode::invalid_argument,
            "reference size does not match stiffness map");
    std::vector<TrackConstraint> out(reference.size());
    for (std::size_t i = 0; i < reference.size(); ++i) {
        out[i] = {static_cast<int>(i), reference[i], lerp(coupling.track_lo, coupling.track_hi, map.vertex_stiffness[i])};
    }
    return out;
}

void apply_friction(SimState& state, std::span<const CollisionConstraint> collisions, std::span<const Vec3> step_start,
                    double mu_static, double mu_kinetic) {
    for (const auto& c : collisions) {
        const auto i = static_cast<std::size_t>(c.vertex);
        if (state.inv_mass[i] == 0.0) continue;
        const Vec3& p = state.positions[i];
        const double depth = c.offset - c.normal.dot(step_start[i]);
        // Only contacts that are touching the plane at the end of the step carry friction.
        if (c.normal.dot(p) - c.offset > 1e-9) continue;
        const Vec3 motion = (p - step_start[i]) - c.collider_motion;
        state.positions[i] += friction_correction(motion, c.normal, std::max(depth, 0.0), mu_static, mu_kinetic);
    }
}

StepReport step(SimState& state, const geom::TriMesh& mesh, ConstraintSet& constraints,
                std::span<const ColliderFrame> colliders, const SolverConfig& config,
                std::span<const Vec3> external_forces) {
    config.validate();
    state.validate();
    const auto n = state.size();
    require(n == mesh.vertex_count(), ErrorCode::invalid_argument, "state size does not match mesh");
    require(external_forces.empty() || external_forces.size() == n, ErrorCode::invalid_argument,
            "external force count does not match state");
    for (const auto& col : colliders) {
        require(col.mesh != nullptr && col.positions.size() == col.mesh->vertex_count() &&
                    (col.prev_positions.empty() || col.prev_positions.size() == col.positions.size()),
                ErrorCode::invalid_argument, "collider frame does not match its mesh");
    }

    StepReport report;
    const double h = config.dt / config.substeps;
    const int iters = config.iterations;
    Points start(n);
    Points collider_pos;
    Points collider_prev;

    for (int sub = 0; sub < config.substeps; ++sub) {
        start = state.positions;
        for (std::size_t i = 0; i < n; ++i) {
            if (state.inv_mass[i] == 0.0) {
                state.velocities[i].setZero();
                continue;
            }
            Vec3 accel = config.gravity;
            if (!external_forces.empty()) accel += state.inv_mass[i] * external_forces[i];
            state.velocities[i] += h * accel;
            state.positions[i] += h * state.velocities[i];
        }

        constraints.collisions.clear();
        for (const auto& col : colliders) {
            const double t1 = static_cast<double>(sub + 1) / config.substeps;
            const double t0 = static_cast<double>(sub) / config.substeps;
            collider_pos = col.positions;
            collider_prev = col.positions;
            if (!col.prev_positions.empty()) {
                for (std::size_t v = 0; v < collider_pos.size(); ++v) {
                    collider_pos[v] = col.prev_positions[v] + t1 * (col.positions[v] - col.prev_positions[v]);
                    collider_prev[v] = col.prev_positions[v] + t0 * (col.positions[v] - col.prev_positions[v]);
                }
            }
            const geom::SurfaceIndex index(*col.mesh, collider_pos);
            const auto hits = geom::proximity_set(state.positions, index, config.skin_offset + kDetectionMargin);
            for (const auto& [vertex, q] : hits.hits) {
                if (state.inv_mass[static_cast<std::size_t>(vertex)] == 0.0) continue;
                const auto& tri = col.mesh->triangles()[static_cast<std::size_t>(q.triangle_index)];
                Vec3 motion = Vec3::Zero();
                for (int k = 0; k < 3; ++k) {
                    const auto idx = static_cast<std::size_t>(tri[static_cast<std::size_t>(k)]);
                    motion += q.barycentric[k] * (collider_pos[idx] - collider_prev[idx]);
                }
                constraints.collisions.push_back({vertex, q.normal, q.normal.dot(q.point) + config.skin_offset, motion});
            }
        }
        report.collisions = static_cast<int>(constraints.collisions.size());

        auto& x = state.positions;
        const auto& w = state.inv_mass;
        for (int it = 0; it < iters; ++it) {
            for (const auto& c : constraints.stretch) {
                const auto& [a, b] = mesh.edges()[static_cast<std::size_t>(c.edge)];
                const auto ia = static_cast<std::size_t>(a);
                const auto ib = static_cast<std::size_t>(b);
                const auto corr = project_stretch(x[ia], x[ib], w[ia], w[ib], c.rest_length,
                                                  per_iteration_stiffness(c.stiffness, iters));
                if (corr.degenerate) ++report.degenerate_stretch;
                x[ia] += corr.delta_a;
                x[ib] += corr.delta_b;
            }
            for (const auto& c : constraints.bend) {
                const auto& bp = mesh.bend_pairs()[static_cast<std::size_t>(c.bend_pair)];
                const std::array<std::size_t, 4> ids{static_cast<std::size_t>(bp.p1), static_cast<std::size_t>(bp.p2),
                                                     static_cast<std::size_t>(bp.p3), static_cast<std::size_t>(bp.p4)};
                const auto corr = project_bend({x[ids[0]], x[ids[1]], x[ids[2]], x[ids[3]]},
                                               {w[ids[0]], w[ids[1]], w[ids[2]], w[ids[3]]}, c.rest_angle,
                                               per_iteration_stiffness(c.stiffness, iters));
                if (corr.skipped) {
                    ++report.skipped_bends;
                    continue;
                }
                for (std::size_t k = 0; k < 4; ++k) x[ids[k]] += corr.delta[k];
            }
            for (const auto& c : constraints.track) {
                const auto i = static_cast<std::size_t>(c.vertex);
                if (w[i] == 0.0) continue;
                x[i] += project_track(x[i], c.target, per_iteration_stiffness(c.stiffness, iters));
            }
            for (const auto& c : constraints.collisions) {
                const auto i = static_cast<std::size_t>(c.vertex);
                x[i] += project_collision(x[i], c.normal, c.offset);
            }
        }

        apply_friction(state, constraints.collisions, start, config.friction_static, config.friction_kinetic);

        for (std::size_t i = 0; i < n; ++i) {
            state.velocities[i] = (1.0 - config.damping) * (state.positions[i] - start[i]) / h;
        }
        state.prev_positions = start;
        check_finite(state);
    }
    return report;
}

TrackingResult simulate_tracking(const geom::TriMesh& template_mesh, const stiffness::StiffnessMap& map,
                                 std::span<const Points> reference_sequence,
                                 const geom::TriMesh* collider_mesh, std::span<const Points> collider_sequence,
                                 const TrackingOptions& options) {
    require(!reference_sequence.empty(), ErrorCode::invalid_argument, "empty reference sequence");
    require(options.steps_per_frame >= 1, ErrorCode::validation, "steps_per_frame must be >= 1");
    map.validate(template_mesh);
    const std::size_t frames = reference_sequence.size();
    const std::size_t nv = template_mesh.vertex_count();
    for (std::size_t t = 0; t < frames; ++t) {
        require(reference_sequence[t].size() == nv, ErrorCode::validation,
                "reference frame " + std::to_string(t) + " has " + std::to_string(reference_sequence[t].size()) +
                    " vertices, template has " + std::to_string(nv));
    }
    const bool has_collider = collider_mesh != nullptr && !collider_sequence.empty();
    if (has_collider) {
        require(collider_sequence.size() == frames, ErrorCode::validation,
                "collider sequence length does not match reference sequence");
        for (std::size_t t = 0; t < frames; ++t) {
            require(collider_sequence[t].size() == collider_mesh->vertex_count(), ErrorCode::validation,
                    "collider frame " + std::to_string(t) + " does not match the collider topology");
        }
    }

    TrackingResult result;
    SimState state = SimState::at_rest(reference_sequence[0]);
    for (std::size_t t = 0; t < frames; ++t) {
        const Points& ref = reference_sequence[t];
        if (t > 0) {
            const Points& prev_ref = reference_sequence[t - 1];
            for (std::size_t i = 0; i < nv; ++i) {
                const Vec3 carry = ref[i] - prev_ref[i];
                state.positions[i] += carry;
                state.prev_positions[i] += carry;
            }
        }
        ConstraintSet constraints = internal_constraints(template_mesh, map, ref, options.solver.coupling);
        constraints.track = track_constraints(map, ref, options.solver.coupling);

        std::vector<ColliderFrame> colliders;
        if (has_collider) {
            ColliderFrame frame{collider_mesh, collider_sequence[t], t > 0 ? collider_sequence[t - 1] : Points{}};
            colliders.push_back(std::move(frame));
        }

        int contacts = 0;
        for (int s = 0; s < options.steps_per_frame; ++s) {
            if (has_collider && s > 0) colliders.front().prev_positions.clear();
            try {
                contacts = step(state, template_mesh, constraints, colliders, options.solver).collisions;
            } catch (const Error& e) {
                fail(e.code(), "frame " + std::to_string(t) + ": " + e.what());
            }
        }

        double worst = 0.0;
        if (has_collider) {
            const geom::SurfaceIndex index(*collider_mesh, collider_sequence[t]);
            for (const auto& [v, q] : geom::proximity_set(state.positions, index, 0.0).hits) {
                worst = std::max(worst, -q.signed_distance);
            }
        }
        Points disp(nv);
        for (std::size_t i = 0; i < nv; ++i) disp[i] = state.positions[i] - ref[i];
        result.deformed.push_back(state.positions);
        result.displacements.push_back(std::move(disp));
        result.contact_counts.push_back(contacts);
        result.max_penetration.push_back(worst);
    }
    return result;
}

} // namespace defcap::pbd
