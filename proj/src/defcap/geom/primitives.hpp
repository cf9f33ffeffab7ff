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

namespace defcap::geom {

/// Subdivided icosahedron on the unit sphere, outward winding.
/// Vertex count is 10 * 4^levels + 2.
TriMesh unit_icosphere(int levels);

/// Signed volume enclosed by the triangles; positive for outward winding.
double signed_volume(std::span<const Vec3> vertices, std::span<const Triangle> triangles);

} // namespace defcap::geom
