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

#include "defcap/app/json_util.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace defcap::app {

inline constexpr const char* kManifestFormat = "defcap-manifest/1";

/// gen-data, fit, eval, stiffness, simulate, inspect.
const std::vector<std::string>& subcommands();

struct RunOptions {
    std::string subcommand;
    fs::path config_path; // empty: all defaults; a manifest replays its run
    fs::path out_dir;
    std::optional<std::uint64_t> seed;
    int threads = 0; // 0 keeps the current setting
    bool quiet = false;
};

struct RunResult {
    json manifest;
    std::string summary; // human-readable, one or more lines
};

/// Runs one subcommand and writes manifest.json into out_dir last. Relative
/// paths in the config resolve against the config file's directory. Outputs
/// other than the manifest depend only on the config and inputs.
RunResult run_command(const RunOptions& options);

} // namespace defcap::app
