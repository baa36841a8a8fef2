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

#include "vmil/pipeline.hpp"

#include <vector>

#include "vmil/error.hpp"

namespace vmil {

bool TrainedModel::operator==(const TrainedModel& other) const {
  return nlohmann::json(config) == nlohmann::json(other.config) &&
         vocabulary == other.vocabulary && forest == other.forest;
}

nlohmann::json training_report_to_json(const TrainingReport& r) {
  nlohmann::json types = nlohmann::json::object();
  for (const auto& [type, s] : r.clustering)
    types[std::string(to_string(type))] = {{"names", s.names},
                                           {"prototypes", s.prototypes},
                                           {"iterations", s.iterations},
                                           {"evaluations", s.evaluations}};
  return {{"samples", r.samples},
          {"malicious", r.malicious},
          {"legitimate", r.legitimate},
          {"dimension", r.dimension},
          {"clustering", types},
          {"projection", {{"skipped", r.projection.skipped},
                          {"below_threshold", r.projection.below_threshold}}},
          {"training_rates", rates_to_json(r.training_rates)}};
}

namespace {

ProjectionOptions projection_options(const PipelineConfig& c) {
  return ProjectionOptions{c.projection_threshold};
}

std::vector<Label> labels_of(std::span<const SandboxSample> samples) {
  std::vector<Label> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

// Clusters every resource type of the labeled samples into prototypes.
Vocabulary cluster_vocabulary(std::span<const SandboxSample> labeled, const PipelineConfig& config,
                              const SimilarityMap& sims, TrainingReport* report) {
  const auto instances = extract_instances(labeled);
  PrototypeMap prototypes;
  for (const auto& [type, names] : instances) {
    if (names.empty()) continue;
    const std::vector<std::string> list(names.begin(), names.end());
    const auto result = approx_cluster(list, type, sims.at(type), config.clustering);
    if (report)
      report->clustering[type] = {list.size(), result.prototypes.size(),
                                  result.iterations.size(), result.evaluations};
    prototypes[type] = result.prototypes;
  }
  if (prototypes.empty()) throw DataError("training samples contain no resource instances");
  return build_vocabulary(std::move(prototypes));
}

}  // namespace

TrainedModel train_model(std::span<const SandboxSample> samples, const PipelineConfig& config,
                         TrainingReport* report) {
  config.validate();
  const auto labeled = labeled_only(samples);
  if (labeled.empty()) throw DataError("training set has no labeled samples");
  const auto labels = labels_of(labeled);

  const auto sims = make_similarities(config.similarity);
  TrainingReport local;
  TrainedModel model{config, cluster_vocabulary(labeled, config, sims, &local), {}};
  const Projector projector(model.vocabulary, sims, projection_options(config));
  const auto rows = projector.project_all(labeled, &local.projection);
  model.forest = train_forest(rows, labels, config.forest);

  if (report) {
    local.samples = labeled.size();
    for (Label l : labels) (l == Label::malicious ? local.malicious : local.legitimate)++;
    local.dimension = model.vocabulary.size();
    std::vector<Label> predicted;
    predicted.reserve(rows.size());
    for (const auto& p : model.forest.predict_all(rows)) predicted.push_back(p.label);
    local.training_rates = confusion_rates(labels, predicted);
    *report = std::move(local);
  }
  return model;
}

GridSearchResult pipeline_grid_search(std::span<const SandboxSample> samples,
                                      const PipelineConfig& config,
                                      std::span<const ForestConfig> grid, std::size_t folds,
                                      std::uint64_t seed) {
  config.validate();
  if (grid.empty()) throw std::invalid_argument("pipeline_grid_search: empty grid");
  const auto labeled = labeled_only(samples);
  const auto labels = labels_of(labeled);
  const auto fold = stratified_folds(labels, folds, seed);
  const auto sims = make_similarities(config.similarity);

  GridSearchResult result;
  for (const auto& cell : grid) result.cells.push_back({cell, {}, 0.0});
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<SandboxSample> train, test;
    for (std::size_t i = 0; i < labeled.size(); ++i)
      (fold[i] == static_cast<int>(f) ? test : train).push_back(labeled[i]);
    const auto vocabulary = cluster_vocabulary(train, config, sims, nullptr);
    const Projector projector(vocabulary, sims, projection_options(config));
    const auto train_x = projector.project_all(train);
    const auto test_x = projector.project_all(test);
    const auto train_y = labels_of(train), test_y = labels_of(test);
    for (auto& cell : result.cells) {
      const auto forest = train_forest(train_x, train_y, cell.config);
      std::vector<Label> predicted;
      for (const auto& p : forest.predict_all(test_x)) predicted.push_back(p.label);
      cell.fold_accuracy.push_back(confusion_rates(test_y, predicted).accuracy);
    }
  }
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    auto& cell = result.cells[i];
    double sum = 0.0;
    for (double a : cell.fold_accuracy) sum += a;
    cell.mean_accuracy = sum / static_cast<double>(folds);
    if (cell.mean_accuracy > result.cells[result.best_index].mean_accuracy) result.best_index = i;
  }
  return result;
}

std::vector<Prediction> predict(const TrainedModel& model,
                                std::span<const SandboxSample> samples) {
  const auto sims = make_similarities(model.config.similarity);
  const Projector projector(model.vocabulary, sims, projection_options(model.config));
  return model.forest.predict_all(projector.project_all(samples));
}

RateReport evaluate(const TrainedModel& model, std::span<const SandboxSample> samples) {
  const auto labeled = labeled_only(samples);
  if (labeled.empty()) throw DataError("evaluation set has no labeled samples");
  const auto predictions = predict(model, labeled);
  std::vector<Label> predicted;
  predicted.reserve(predictions.size());
  for (const auto& p : predictions) predicted.push_back(p.label);
  return confusion_rates(labels_of(labeled), predicted);
}

}  // namespace vmil
