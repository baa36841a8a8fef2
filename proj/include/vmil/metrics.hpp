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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vmil/clustering.hpp"
#include "vmil/forest.hpp"
#include "vmil/ingest.hpp"

namespace vmil {

// Malicious is the positive class. Rates whose denominator is zero are
// absent: TPR/FNR without malicious samples, TNR/FPR without legitimate
// ones.
struct RateReport {
  std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
  std::optional<double> tpr, fnr, tnr, fpr;
  double accuracy = 0.0;
};

// Throws std::invalid_argument on empty or unequal inputs and on unknown
// labels.
RateReport confusion_rates(std::span<const Label> truth, std::span<const Label> predicted);

nlohmann::json rates_to_json(const RateReport& r);
// Aligned two-column table.
std::string rates_to_text(const RateReport& r);

// Pair-counting Rand index corrected for chance under the permutation
// model. Two partitions that both put every node alone (or together) score
// 1. Throws std::invalid_argument for fewer than two nodes or mismatched
// sizes.
double adjusted_rand_index(const Partition& a, const Partition& b);

// Fold index per sample. Each class is shuffled and dealt round-robin, so
// per-fold class counts differ by at most one. Throws DegenerateError when
// some class has fewer samples than folds.
std::vector<int> stratified_folds(std::span<const Label> labels, std::size_t folds,
                                  std::uint64_t seed);

struct GridCell {
  ForestConfig config;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
};

struct GridSearchResult {
  std::size_t best_index = 0;
  std::vector<GridCell> cells;

  const ForestConfig& best() const { return cells.at(best_index).config; }
};

// Scores every forest configuration by mean k-fold accuracy on already
// projected rows; the first best cell in grid order wins.
GridSearchResult kfold_grid_search(std::span<const FeatureVector> rows,
                                   std::span<const Label> labels,
                                   std::span<const ForestConfig> grid, std::size_t folds = 5,
                                   std::uint64_t seed = 0);

// Cartesian product over the listed values, other fields from `base`.
std::vector<ForestConfig> forest_grid(const ForestConfig& base,
                                      std::span<const std::size_t> trees,
                                      std::span<const std::optional<std::size_t>> max_depths,
                                      std::span<const std::size_t> min_splits,
                                      std::span<const Criterion> criteria);

nlohmann::json grid_to_json(const GridSearchResult& r);

}  // namespace vmil
