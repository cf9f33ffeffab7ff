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

#include "defcap/fit/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace defcap::fit {

const char* to_string(FitStatus status) {
    switch (status) {
    case FitStatus::completed: return "completed";
    case FitStatus::converged: return "converged";
    case FitStatus::diverged: return "diverged";
    }
    return "unknown";
}

namespace {

double group_rate(const OptimizerConfig& o, WindowObjective::Group g) {
    switch (g) {
    case WindowObjective::Group::translation: return o.lr_translation;
    case WindowObjective::Group::rotation: return o.lr_rotation;
    case WindowObjective::Group::shape: return o.lr_shape;
    case WindowObjective::Group::expression: return o.lr_expression;
    case WindowObjective::Group::deformation: return o.lr_deformation;
    }
    return 0.0;
}

} // namespace

bool optimize_window(const FitProblem& problem, const FitConfig& config, std::size_t begin, std::size_t end,
                     FitState& state, std::vector<TraceRow>& trace, std::size_t window_index, FitStatus& status) {
    FitProblem local = problem;
    local.face_init = state.face;
    local.hand_init = state.hand;
    for (std::size_t t = begin; t < end; ++t) local.frames[t].deformation0 = state.deformation[t];
    WindowObjective objective(local, config, begin, end);

    const auto& opt = config.optimizer;
    VecX x = objective.pack(state);
    VecX rates(x.size());
    VecX eps(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const auto group = objective.groups()[static_cast<std::size_t>(i)];
        rates[i] = group_rate(opt, group);
        eps[i] = group == WindowObjective::Group::deformation ? opt.epsilon_deformation : opt.epsilon;
    }
    VecX m = VecX::Zero(x.size());
    VecX v = VecX::Zero(x.size());
    VecX last_good = x;
    double previous = std::numeric_limits<double>::quiet_NaN();
    int quiet_steps = 0;

    auto record = [&](int step, const TermBreakdown& terms) {
        trace.push_back({window_index, begin, step, terms});
    };

    for (int step = 0; step <= opt.steps; ++step) {
        objective.prepare(x);
        const ObjectiveValue value = objective.evaluate(x);
        record(step, value.terms);
        if (!std::isfinite(value.value) || !value.gradient.allFinite()) {
            objective.unpack(last_good, state);
            status = FitStatus::diverged;
            return false;
        }
        last_good = x;
        if (step == opt.steps) break;
        if (opt.tolerance > 0.0 && std::isfinite(previous)) {
            const double rel = std::abs(previous - value.value) / std::max(std::abs(previous), 1e-300);
            quiet_steps = rel < opt.tolerance ? quiet_steps + 1 : 0;
            if (quiet_steps >= 10) {
                status = FitStatus::converged;
                break;
            }
        }
        previous = value.value;

        const double progress = opt.steps > 1 ? static_cast<double>(step) / (opt.steps - 1) : 0.0;
        const double warmup = opt.warmup_steps > 0 ? std::min(1.0, (step + 1.0) / opt.warmup_steps) : 1.0;
        const double decay = warmup * std::pow(opt.final_lr_fraction, progress);
        const double t = step + 1.0;
        const double c1 = 1.0 - std::pow(opt.beta1, t);
        const double c2 = 1.0 - std::pow(opt.beta2, t);
        m = opt.beta1 * m + (1.0 - opt.beta1) * value.gradient;
        v = opt.beta2 * v + (1.0 - opt.beta2) * value.gradient.cwiseProduct(value.gradient);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            x[i] -= decay * rates[i] * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps[i]);
        }
    }
    objective.unpack(last_good, state);
    return true;
}

FitResult optimize(const FitProblem& problem, const FitConfig& config) {
    problem.validate();
    config.validate();
    FitResult result;
    result.state = FitState::initial(problem);
    const std::size_t n = problem.frames.size();
    const auto w = static_cast<std::size_t>(config.window);
    std::size_t index = 0;
    for (std::size_t begin = 0; begin < n; begin += w, ++index) {
        const std::size_t end = std::min(n, begin + w);
        FitStatus status = FitStatus::completed;
        if (!optimize_window(problem, config, begin, end, result.state, result.trace, index, status)) {
            result.status = FitStatus::diverged;
            result.message = "objective became non-finite in window starting at frame " + std::to_string(begin);
            return result;
        }
        if (status == FitStatus::converged && result.status == FitStatus::completed) result.status = status;
    }
    return result;
}

} // namespace defcap::fit
