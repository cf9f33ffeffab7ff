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

#include <cmath>
#include <numbers>
#include <map>
#include <random>

namespace testsupport {

using defcap::Points;
using defcap::Vec3;
using defcap::geom::Triangle;

inline defcap::geom::TriMesh icosahedron(double radius = 1.0) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    Points v{{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
             {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& p : v) p = p.normalized() * radius;
    std::vector<Triangle> f{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                            {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                            {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    return defcap::geom::build_topology(std::move(v), std::move(f));
}

// Regular nx x ny grid of squares in the z = 0 plane, each split into two triangles.
inline defcap::geom::TriMesh grid(int nx, int ny, double spacing, Vec3 origin = Vec3::Zero()) {
    Points v;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) v.push_back(origin + Vec3(i * spacing, j * spacing, 0.0));
    std::vector<Triangle> f;
    auto id = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return defcap::geom::build_topology(std::move(v), std::move(f));
}

// Sphere by repeated subdivision of the icosahedron.
inline defcap::geom::TriMesh sphere(int levels, double radius, Vec3 center = Vec3::Zero()) {
    auto base = icosahedron(1.0);
    Points v = base.vertices();
    std::vector<Triangle> f = base.triangles();
    for (int l = 0; l < levels; ++l) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            v.push_back((v[a] + v[b]).normalized());
            const int id = static_cast<int>(v.size()) - 1;
            mid.emplace(key, id);
            return id;
        };
        std::vector<Triangle> next;
        for (const auto& t : f) {
            const int a = midpoint(t[0], t[1]), b = midpoint(t[1], t[2]), c = midpoint(t[2], t[0]);
            next.push_back({t[0], a, c});
            next.push_back({t[1], b, a});
            next.push_back({t[2], c, b});
            next.push_back({a, b, c});
        }
        f = std::move(next);
    }
    for (auto& p : v) p = center + radius * p;
    return defcap::geom::build_topology(std::move(v), std::move(f));
}

inline Points random_points(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Points out(n);
    for (auto& p : out) p = Vec3(u(rng), u(rng), u(rng));
    return out;
}

} // namespace testsupport
