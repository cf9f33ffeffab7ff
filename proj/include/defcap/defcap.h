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

#ifndef DEFCAP_DEFCAP_H
#define DEFCAP_DEFCAP_H

#include <stddef.h>
#include <stdint.h>

#if defined(DEFCAP_BUILDING_LIBRARY)
#define DEFCAP_API __attribute__((visibility("default")))
#else
#define DEFCAP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum defcap_status {
    DEFCAP_OK = 0,
    DEFCAP_ERR_INVALID_ARGUMENT = 1,
    DEFCAP_ERR_IO = 2,
    DEFCAP_ERR_VALIDATION = 3,
    DEFCAP_ERR_NUMERICAL = 4,
    DEFCAP_ERR_NOT_FOUND = 5,
    DEFCAP_ERR_INTERNAL = 6
} defcap_status;

typedef struct defcap_context defcap_context;
typedef struct defcap_mesh defcap_mesh;

DEFCAP_API const char* defcap_version(void);
/* Stable lower-case name such as "validation"; "unknown" for other values. */
DEFCAP_API const char* defcap_status_name(defcap_status status);

DEFCAP_API defcap_status defcap_context_create(defcap_context** out);
DEFCAP_API void defcap_context_destroy(defcap_context* ctx);
/* Message of the last failed call on ctx, "" after a success. Valid until the next call. */
DEFCAP_API const char* defcap_last_error(const defcap_context* ctx);

/* Subcommand names, index 0 .. count - 1. */
DEFCAP_API size_t defcap_subcommand_count(void);
DEFCAP_API const char* defcap_subcommand_name(size_t index);

typedef struct defcap_run_options {
    const char* subcommand;
    const char* config_path; /* NULL: defaults */
    const char* out_dir;
    int has_seed;
    uint64_t seed;
    int threads; /* 0 keeps the current setting */
} defcap_run_options;

/* Runs a subcommand; writes outputs and manifest.json into out_dir. */
DEFCAP_API defcap_status defcap_run(defcap_context* ctx, const defcap_run_options* options);
/* Human-readable summary of the last successful run. */
DEFCAP_API const char* defcap_run_summary(const defcap_context* ctx);

DEFCAP_API defcap_status defcap_mesh_load_obj(defcap_context* ctx, const char* path, defcap_mesh** out);
DEFCAP_API void defcap_mesh_destroy(defcap_mesh* mesh);
DEFCAP_API size_t defcap_mesh_vertex_count(const defcap_mesh* mesh);
DEFCAP_API size_t defcap_mesh_triangle_count(const defcap_mesh* mesh);
/* Copies xyz triples; capacity counts doubles and must be >= 3 * vertex count. */
DEFCAP_API defcap_status defcap_mesh_vertices(defcap_context* ctx, const defcap_mesh* mesh, double* out, size_t capacity);

/* s_i = (1 - d_hat_i)^exponent over n distances. */
DEFCAP_API defcap_status defcap_stiffness_from_distances(defcap_context* ctx, const double* distances, size_t n,
                                                         double exponent, double* out);
/* Harmonic mean 2ab / (a + b). */
DEFCAP_API defcap_status defcap_f_score(defcap_context* ctx, double a, double b, double* out);

#ifdef __cplusplus
}
#endif

#endif
