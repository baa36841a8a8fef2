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

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "vmil/ckta.hpp"
#include "vmil/clustering.hpp"
#include "vmil/forest.hpp"
#include "vmil/similarity.hpp"

namespace vmil {

// Everything a training run depends on besides the reports themselves.
struct PipelineConfig {
  SimilarityConfig similarity;
  ApproxConfig clustering;
  ForestConfig forest;
  OptimizerConfig optimizer;
  std::optional<double> projection_threshold;
  int label_threshold = 4;

  // Sets every module seed. Seeds are derived, not shared, so changing one
  // stage does not shift the random stream of another.
  void set_seed(std::uint64_t seed);
  void validate() const;
};

// {"similarity": {...}, "clustering": {...}, "forest": {...},
//  "optimizer": {...}, "projection_threshold": x|null, "label_threshold": n}
// Missing keys keep their defaults.
void to_json(nlohmann::json& j, const PipelineConfig& c);
void from_json(const nlohmann::json& j, PipelineConfig& c);

// Throws DataError when the file cannot be read or parsed.
PipelineConfig load_config(const std::string& path);

// Parses a whole JSON document, mapping syntax errors to ParseError.
nlohmann::json read_json_file(const std::string& path);
// Pretty-printed with a trailing newline; the output is stable for equal input.
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace vmil
