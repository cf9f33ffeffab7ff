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

#include "defcap/app/commands.hpp"
#include "defcap/geom/obj_io.hpp"
#include "defcap/metrics/metrics.hpp"
#include "defcap/stiffness/stiffness.hpp"

#include <algorithm>
#include <filesystem>
#include <memory>
#include <new>
#include <string>

struct defcap_context {
    std::string error;
    std::string summary;
};

struct defcap_mesh {
    defcap::geom::TriMesh mesh;
};

namespace {

template <class F>
defcap_status guarded(defcap_context* ctx, F&& body) {
    if (!ctx) return DEFCAP_ERR_INVALID_ARGUMENT;
    ctx->error.clear();
    try {
        body();
        return DEFCAP_OK;
    } catch (const defcap::Error& e) {
        ctx->error = e.what();
        return static_cast<defcap_status>(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        ctx->error = e.what();
        return DEFCAP_ERR_IO;
    } catch (const nlohmann::json::exception& e) {
        ctx->error = e.what();
        return DEFCAP_ERR_VALIDATION;
    } catch (const std::bad_alloc&) {
        ctx->error = "out of memory";
        return DEFCAP_ERR_INTERNAL;
    } catch (const std::exception& e) {
        ctx->error = e.what();
        return DEFCAP_ERR_INTERNAL;
    } catch (...) {
        ctx->error = "unknown error";
        return DEFCAP_ERR_INTERNAL;
    }
}

void need(bool ok, const char* what) { defcap::require(ok, defcap::ErrorCode::invalid_argument, what); }

} // namespace

extern "C" {

const char* defcap_version(void) { return DEFCAP_VERSION; }

const char* defcap_status_name(defcap_status status) {
    switch (status) {
    case DEFCAP_OK: return "ok";
    case DEFCAP_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case DEFCAP_ERR_IO: return "io";
    case DEFCAP_ERR_VALIDATION: return "validation";
    case DEFCAP_ERR_NUMERICAL: return "numerical";
    case DEFCAP_ERR_NOT_FOUND: return "not_found";
    case DEFCAP_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

defcap_status defcap_context_create(defcap_context** out) {
    if (!out) return DEFCAP_ERR_INVALID_ARGUMENT;
    *out = new (std::nothrow) defcap_context();
    return *out ? DEFCAP_OK : DEFCAP_ERR_INTERNAL;
}

void defcap_context_destroy(defcap_context* ctx) { delete ctx; }

const char* defcap_last_error(const defcap_context* ctx) { return ctx ? ctx->error.c_str() : "null context"; }

size_t defcap_subcommand_count(void) { return defcap::app::subcommands().size(); }

const char* defcap_subcommand_name(size_t index) {
    const auto& names = defcap::app::subcommands();
    return index < names.size() ? names[index].c_str() : nullptr;
}

defcap_status defcap_run(defcap_context* ctx, const defcap_run_options* options) {
    return guarded(ctx, [&] {
        need(options && options->subcommand && options->out_dir, "options, subcommand and out_dir are required");
        defcap::app::RunOptions o;
        o.subcommand = options->subcommand;
        if (options->config_path) o.config_path = options->config_path;
        o.out_dir = options->out_dir;
        if (options->has_seed) o.seed = options->seed;
        o.threads = options->threads;
        ctx->summary = defcap::app::run_command(o).summary;
    });
}

const char* defcap_run_summary(const defcap_context* ctx) { return ctx ? ctx->summary.c_str() : ""; }

defcap_status defcap_mesh_load_obj(defcap_context* ctx, const char* path, defcap_mesh** out) {
    return guarded(ctx, [&] {
        need(path && out, "path and out are required");
        *out = nullptr;
        auto m = std::make_unique<defcap_mesh>();
        m->mesh = defcap::geom::load_obj_mesh(path);
        *out = m.release();
    });
}

void defcap_mesh_destroy(defcap_mesh* mesh) { delete mesh; }

size_t defcap_mesh_vertex_count(const defcap_mesh* mesh) { return mesh ? mesh->mesh.vertex_count() : 0; }

size_t defcap_mesh_triangle_count(const defcap_mesh* mesh) { return mesh ? mesh->mesh.triangle_count() : 0; }

defcap_status defcap_mesh_vertices(defcap_context* ctx, const defcap_mesh* mesh, double* out, size_t capacity) {
    return guarded(ctx, [&] {
        need(mesh && out, "mesh and out are required");
        const auto& v = mesh->mesh.vertices();
        need(capacity >= 3 * v.size(), "output buffer too small");
        for (std::size_t i = 0; i < v.size(); ++i) {
            for (int k = 0; k < 3; ++k) out[3 * i + static_cast<std::size_t>(k)] = v[i][k];
        }
    });
}

defcap_status defcap_stiffness_from_distances(defcap_context* ctx, const double* distances, size_t n, double exponent,
                                              double* out) {
    return guarded(ctx, [&] {
        need(out && (distances || n == 0), "distances and out are required");
        const auto s = defcap::stiffness::stiffness_from_distances({distances, n}, exponent);
        std::copy(s.begin(), s.end(), out);
    });
}

defcap_status defcap_f_score(defcap_context* ctx, double a, double b, double* out) {
    return guarded(ctx, [&] {
        need(out != nullptr, "out is required");
        *out = defcap::metrics::f_score(a, b);
    });
}

} // extern "C"
