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

#include "defcap/model/camera.hpp"
#include "defcap/model/deformable_model.hpp"

#include <filesystem>

namespace defcap::model {

/// Writes <stem>.json, <stem>.obj (template) and <stem>.bin (float64
/// little-endian: shape basis, expression basis, then joint weights, each
/// column-major). Paths inside the JSON are relative to its directory.
void save_model(const DeformableModel& model, const std::filesystem::path& json_path);
DeformableModel load_model(const std::filesystem::path& json_path);

void save_camera(const Camera& camera, const std::filesystem::path& path);
Camera load_camera(const std::filesystem::path& path);

} // namespace defcap::model
