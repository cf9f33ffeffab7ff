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

#include "acceptance.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <iomanip>
#include <vector>

namespace acceptance {

std::string fmt(double v, int digits) {
    std::ostringstream s;
    s << std::setprecision(digits) << v;
    return s.str();
}

} // namespace acceptance

int main(int argc, char** argv) {
    using namespace acceptance;
    namespace fs = std::filesystem;
    const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "defcap_acceptance";

    struct Criterion {
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"f_score_table", 1.0, f_score_table},
        {"stiffness_formula", 1.0, stiffness_formula},
        {"pbd_stretch_convergence", 5.0, pbd_stretch},
        {"pbd_collision_guarantee", 5.0, pbd_collision},
        {"stiffness_ordering", 30.0, stiffness_ordering},
        {"gradient_correctness", 60.0, gradient_check},
        {"fitting_recovery", 120.0, fitting_recovery},
        {"collision_resolution", 120.0, collision_resolution},
        {"metric_oracles", 5.0, metric_oracles},
        {"end_to_end_determinism", 300.0, [&] { return end_to_end_determinism(work); }},
    };

    int passed = 0, unexpected = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.limit_s;
        const bool pass = o.pass && in_time;
        if (!in_time) o.documented_failure = false;
        passed += pass ? 1 : 0;
        unexpected += (!pass && !o.documented_failure) ? 1 : 0;
        std::printf("%s %s: %s [%.2f s, limit %.0f s]%s\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                    c.limit_s, !pass && o.documented_failure ? " (documented limitation)" : "");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria pass, %d unexpected failure(s)\n", passed, criteria.size(), unexpected);
    return unexpected == 0 ? 0 : 1;
}
