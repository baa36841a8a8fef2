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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "vmil/ingest.hpp"
#include "vmil/vectorize.hpp"

namespace vmil {

enum class Criterion { gini, entropy };

struct ForestConfig {
  std::size_t trees = 100;
  std::optional<std::size_t> max_depth;           // unset: grow until pure
  std::size_t min_samples_split = 2;
  Criterion criterion = Criterion::gini;
  std::optional<std::size_t> features_per_split;  // unset: ceil(sqrt(d))
  bool bootstrap = true;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument when trees < 1 or min_samples_split < 2.
  void validate() const;
  std::size_t candidates_for(std::size_t dimension) const;

  bool operator==(const ForestConfig&) const = default;
};

void to_json(nlohmann::json& j, const ForestConfig& c);
void from_json(const nlohmann::json& j, ForestConfig& c);

// Class counts are indexed legitimate = 0, malicious = 1.
using ClassCounts = std::array<std::uint32_t, 2>;

// gini = 1 - sum p^2, entropy = -sum p log2 p. Throws
// std::invalid_argument for an empty node.
double impurity(const ClassCounts& counts, Criterion criterion);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  int left = -1;     // child for feature value 0
  int right = -1;    // child for feature value 1
  ClassCounts counts{};

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& leaf_for(const FeatureVector& x) const;
  // Fraction of malicious training samples in the leaf reached by x.
  double malicious_fraction(const FeatureVector& x) const;
  std::size_t depth() const;

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;  // root at 0
};

struct Prediction {
  Label label = Label::legitimate;
  double score = 0.0;  // mean malicious fraction over trees
};

class Forest {
 public:
  Forest() = default;
  Forest(std::vector<DecisionTree> trees, std::size_t dimension)
      : trees_(std::move(trees)), dimension_(dimension) {}

  const std::vector<DecisionTree>& trees() const { return trees_; }
  std::size_t dimension() const { return dimension_; }

  // Malicious iff score >= 0.5, so an even split goes to malicious. Throws
  // std::invalid_argument when x has the wrong length.
  Prediction predict(const FeatureVector& x) const;
  std::vector<Prediction> predict_all(std::span<const FeatureVector> rows) const;

  bool operator==(const Forest&) const = default;

 private:
  std::vector<DecisionTree> trees_;
  std::size_t dimension_ = 0;
};

// Trains cfg.trees CART trees, each on its own bootstrap draw when enabled
// and with its own random stream derived from (seed, tree index). Throws
// DegenerateError unless both classes are present; unknown labels are an
// std::invalid_argument.
Forest train_forest(std::span<const FeatureVector> rows, std::span<const Label> labels,
                    const ForestConfig& config);

nlohmann::json forest_to_json(const Forest& f);
Forest forest_from_json(const nlohmann::json& j);

}  // namespace vmil
