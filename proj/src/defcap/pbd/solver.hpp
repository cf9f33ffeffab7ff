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
#include "defcap/pbd/constraints.hpp"
#include "defcap/stiffness/stiffness.hpp"

#include <span>
#include <vector>

namespace defcap::pbd {

struct SimState {
    Points positions;
    Points prev_positions;
    std::vector<Vec3> velocities;
    std::vector<double> inv_mass; // 0 pins the particle

    /// Particles at rest with unit mass.
    static SimState at_rest(const Points& positions);
    void validate() const;
    std::size_t size() const { return positions.size(); }
};

struct StretchConstraint {
    int edge = 0;
    double rest_length = 0.0;
    double stiffness = 1.0;
};

struct BendConstraint {
    int bend_pair = 0;
    double rest_angle = 0.0;
    double stiffness = 1.0;
};

/// Half-space contact, regenerated every step.
struct CollisionConstraint {
    int vertex = 0;
    Vec3 normal = Vec3::UnitZ();
    double offset = 0.0;
    /// Motion of the collider surface point during the step (for friction).
    Vec3 collider_motion = Vec3::Zero();
};

struct TrackConstraint {
    int vertex = 0;
    Vec3 target = Vec3::Zero();
    double stiffness = 1.0;
};

struct ConstraintSet {
    std::vector<StretchConstraint> stretch;
    std::vector<BendConstraint> bend;
    std::vector<CollisionConstraint> collisions;
    std::vector<TrackConstraint> track;

    void validate(const geom::TriMesh& mesh) const;
};

/// Maps tissue stiffness s in [0, 1] to constraint stiffness k = lo + (hi - lo) * s.
/// A zero lower bound would leave s = 0 regions without any internal resistance.
struct StiffnessCoupling {
    double stretch_lo = 0.1, stretch_hi = 1.0;
    double bend_lo = 0.1, bend_hi = 1.0;
    double track_lo = 0.02, track_hi = 0.5;
};

struct SolverConfig {
    double dt = 0.02;
    int iterations = 20;
    int substeps = 1;
    double friction_static = 0.5;
    double friction_kinetic = 0.5;
    Vec3 gravity = Vec3::Zero();
    /// Distance h kept between skin and collider.
    double skin_offset = 0.002;
    /// Fraction of velocity removed per step.
    double damping = 0.0;
    StiffnessCoupling coupling;

    void validate() const;
};

/// A collider surface at the end of the step and where it was at the start.
struct ColliderFrame {
    const geom::TriMesh* mesh = nullptr;
    Points positions;
    Points prev_positions; // empty: static collider
};

/// Stretch and bend constraints for every edge and bend pair, stiffness from
/// the map, rest data from rest_positions.
ConstraintSet internal_constraints(const geom::TriMesh& mesh, const stiffness::StiffnessMap& map,
                                   std::span<const Vec3> rest_positions, const StiffnessCoupling& coupling);

/// Track constraints pulling every vertex to its reference position.
std::vector<TrackConstraint> track_constraints(const stiffness::StiffnessMap& map, std::span<const Vec3> reference,
                                               const StiffnessCoupling& coupling);

/// Applies friction to every active contact of the step, in place.
void apply_friction(SimState& state, std::span<const CollisionConstraint> collisions, std::span<const Vec3> step_start,
                    double mu_static, double mu_kinetic);

struct StepReport {
    int collisions = 0;
    int skipped_bends = 0;
    int degenerate_stretch = 0;
};

/// One PBD step: integrate, predict, regenerate contacts against the
/// colliders, n Gauss-Seidel sweeps over stretch, bend, track, collision (in
/// that order), friction, then velocities from the position change.
/// external_forces (N, unit mass) may be empty. Throws Error(numerical) naming
/// the vertex if a position becomes non-finite.
StepReport step(SimState& state, const geom::TriMesh& mesh, ConstraintSet& constraints,
                std::span<const ColliderFrame> colliders, const SolverConfig& config,
                std::span<const Vec3> external_forces = {});

struct TrackingResult {
    std::vector<Points> deformed;
    std::vector<Points> displacements;
    std::vector<int> contact_counts;
    /// Deepest penetration of a deformed vertex into the collider per frame (m, >= 0).
    std::vector<double> max_penetration;
};

struct TrackingOptions {
    SolverConfig solver;
    int steps_per_frame = 1;
};

/// Follows a reference sequence while resolving contact with a moving
/// collider. Reference motion is transported kinematically so only the
/// deviation from the reference is simulated; rest lengths and angles come
/// from each reference frame. Collider frames may be empty (no contact).
TrackingResult simulate_tracking(const geom::TriMesh& template_mesh, const stiffness::StiffnessMap& map,
                                 std::span<const Points> reference_sequence,
                                 const geom::TriMesh* collider_mesh, std::span<const Points> collider_sequence,
                                 const TrackingOptions& options);

} // namespace defcap::pbd
