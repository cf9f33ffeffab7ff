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

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace defcap {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

using Points = std::vector<Vec3>;

/// Error categories shared by the C++ core and the C API.
enum class ErrorCode {
    invalid_argument = 1,
    io = 2,
    validation = 3,
    numerical = 4,
    not_found = 5,
    internal = 6,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) fail(code, what);
}

// Worker count used by parallel_for. 1 means run inline.
void set_thread_count(int n);
int thread_count();

// Runs body(i) for i in [0, n). Each index is handled by exactly one worker, so
// bodies that only write slot i give results independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace defcap
