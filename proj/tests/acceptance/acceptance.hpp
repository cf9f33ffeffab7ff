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

#include "defcap/common.hpp"

#include <filesystem>
#include <string>

namespace acceptance {

struct Outcome {
    bool pass = false;
    std::string detail;
    /// Failure confined to a clause recorded as unattainable in the README.
    bool documented_failure = false;
};

Outcome f_score_table();
Outcome stiffness_formula();
Outcome pbd_stretch();
Outcome pbd_collision();
Outcome stiffness_ordering();
Outcome gradient_check();
Outcome fitting_recovery();
Outcome collision_resolution();
Outcome metric_oracles();
Outcome end_to_end_determinism(const std::filesystem::path& work);

std::string fmt(double v, int digits = 3);

} // namespace acceptance
