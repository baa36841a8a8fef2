// Copyright 2026 The vmil Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>

#include "vmil/pipeline.hpp"

namespace vmil {

inline constexpr int kBundleVersion = 1;

// Directory layout: manifest.json (format version and configuration),
// vocabulary.json, weights.json and forest.json. Existing files are replaced.
void save_bundle(const TrainedModel& model, const std::string& dir);

// Throws DataError for missing or corrupted files, a version other than
// kBundleVersion, or parts that disagree with each other.
TrainedModel load_bundle(const std::string& dir);

}  // namespace vmil
