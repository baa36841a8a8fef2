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

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "json.hpp"
#include "vmil/config.hpp"
#include "vmil/forest.hpp"
#include "vmil/ingest.hpp"
#include "vmil/metrics.hpp"
#include "vmil/vectorize.hpp"

namespace vmil {

// A trained classifier: prototypes fixed at training time plus the forest.
struct TrainedModel {
  PipelineConfig config;
  Vocabulary vocabulary;
  Forest forest;

  bool operator==(const TrainedModel& other) const;
};

struct TypeClusteringSummary {
  std::size_t names = 0;
  std::size_t prototypes = 0;
  std::size_t iterations = 0;
  std::uint64_t evaluations = 0;
};

struct TrainingReport {
  std::size_t samples = 0;
  std::size_t malicious = 0;
  std::size_t legitimate = 0;
  std::size_t dimension = 0;
  std::map<ResourceType, TypeClusteringSummary> clustering;
  ProjectionStats projection;
  RateReport training_rates;  // forest replayed on its own training rows
};

nlohmann::json training_report_to_json(const TrainingReport& r);

// Extract, cluster per type, build the vocabulary, project and fit the
// forest. Unlabeled samples are ignored. Throws DataError when no labeled
// samples remain and DegenerateError when only one class does.
TrainedModel train_model(std::span<const SandboxSample> samples, const PipelineConfig& config,
                         TrainingReport* report = nullptr);

// Cross-validated search over forest settings. Each fold clusters its own
// training split once; every grid cell then refits only the forest. Ties go
// to the earlier cell.
GridSearchResult pipeline_grid_search(std::span<const SandboxSample> samples,
                                      const PipelineConfig& config,
                                      std::span<const ForestConfig> grid, std::size_t folds = 5,
                                      std::uint64_t seed = 0);

// Projection uses only the stored prototypes; clustering is not rerun.
std::vector<Prediction> predict(const TrainedModel& model,
                                std::span<const SandboxSample> samples);

// Scores the labeled samples. Throws DataError when there are none.
RateReport evaluate(const TrainedModel& model, std::span<const SandboxSample> samples);

}  // namespace vmil
