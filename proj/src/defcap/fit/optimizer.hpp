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

#include "defcap/fit/objective.hpp"

#include <string>
#include <vector>

namespace defcap::fit {

struct TraceRow {
    std::size_t window = 0;
    std::size_t first_frame = 0;
    int step = 0;
    TermBreakdown terms;
};

enum class FitStatus { completed, converged, diverged };

const char* to_string(FitStatus status);

struct FitResult {
    FitState state;
    std::vector<TraceRow> trace;
    FitStatus status = FitStatus::completed;
    std::string message;
};

/// Adam on one window, starting from the window's entries of state and
/// writing the result back. Assignments are refreshed before every step.
/// Returns false when the objective became non-finite; state then holds the
/// last finite iterate.
bool optimize_window(const FitProblem& problem, const FitConfig& config, std::size_t begin, std::size_t end,
                     FitState& state, std::vector<TraceRow>& trace, std::size_t window_index, FitStatus& status);

/// Fits consecutive non-overlapping windows of config.window frames.
FitResult optimize(const FitProblem& problem, const FitConfig& config);

} // namespace defcap::fit
