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

#include "defcap/defcap.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitDataErr = 65;
constexpr int kExitNoInput = 66;
constexpr int kExitSoftware = 70;
constexpr int kExitIoErr = 74;

int exit_code(defcap_status s) {
    switch (s) {
    case DEFCAP_OK: return 0;
    case DEFCAP_ERR_INVALID_ARGUMENT:
    case DEFCAP_ERR_VALIDATION: return kExitDataErr;
    case DEFCAP_ERR_NOT_FOUND: return kExitNoInput;
    case DEFCAP_ERR_IO: return kExitIoErr;
    default: return kExitSoftware;
    }
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", c);
                out += buf;
            } else {
                out += c;
            }
        }
    }
    return out;
}

void report_error(const std::string& code, const std::string& message) {
    std::cerr << "{\"error\": {\"code\": \"" << code << "\", \"message\": \"" << json_escape(message) << "\"}}\n";
}

struct Flags {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    int threads = 0;
    bool quiet = false;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Face deformation and hand-face interaction capture toolkit"};
    app.set_version_flag("--version", std::string(defcap_version()));
    app.require_subcommand(1);

    Flags flags;
    std::vector<std::pair<CLI::App*, CLI::Option*>> subs;
    for (std::size_t i = 0; i < defcap_subcommand_count(); ++i) {
        const std::string name = defcap_subcommand_name(i);
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", flags.config, "Config JSON or a manifest.json to replay");
        sub->add_option("--out", flags.out, "Output directory")->required();
        auto* seed = sub->add_option("--seed", flags.seed, "Random seed (overrides the config)");
        sub->add_option("--threads", flags.threads, "Worker threads, 0 keeps the default")->check(CLI::NonNegativeNumber);
        sub->add_flag("--quiet", flags.quiet, "No summary on standard output");
        subs.emplace_back(sub, seed);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("usage", e.what());
        return kExitUsage;
    }

    const auto it = std::find_if(subs.begin(), subs.end(), [](const auto& s) { return s.first->parsed(); });
    defcap_context* raw = nullptr;
    if (defcap_context_create(&raw) != DEFCAP_OK) {
        report_error("internal", "cannot create context");
        return kExitSoftware;
    }
    std::unique_ptr<defcap_context, void (*)(defcap_context*)> ctx(raw, defcap_context_destroy);

    const std::string name = it->first->get_name();
    defcap_run_options options{};
    options.subcommand = name.c_str();
    options.config_path = flags.config.empty() ? nullptr : flags.config.c_str();
    options.out_dir = flags.out.c_str();
    options.has_seed = it->second->count() > 0 ? 1 : 0;
    options.seed = flags.seed;
    options.threads = flags.threads;
    const defcap_status status = defcap_run(ctx.get(), &options);
    if (status != DEFCAP_OK) {
        report_error(defcap_status_name(status), defcap_last_error(ctx.get()));
        return exit_code(status);
    }
    if (!flags.quiet) std::cout << defcap_run_summary(ctx.get());
    return 0;
}
