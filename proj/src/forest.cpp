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

#include "vmil/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "vmil/error.hpp"
#include "vmil/parallel.hpp"

namespace vmil {

void ForestConfig::validate() const {
  if (trees < 1) throw std::invalid_argument("forest needs at least one tree");
  if (min_samples_split < 2) throw std::invalid_argument("min_samples_split must be at least 2");
  if (features_per_split && *features_per_split < 1)
    throw std::invalid_argument("features_per_split must be at least 1");
}

std::size_t ForestConfig::candidates_for(std::size_t dimension) const {
  if (features_per_split) return std::min(*features_per_split, dimension);
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dimension))));
}

void to_json(nlohmann::json& j, const ForestConfig& c) {
  j = {{"trees", c.trees},
       {"max_depth", c.max_depth ? nlohmann::json(*c.max_depth) : nlohmann::json()},
       {"min_samples_split", c.min_samples_split},
       {"criterion", c.criterion == Criterion::gini ? "gini" : "entropy"},
       {"features_per_split",
        c.features_per_split ? nlohmann::json(*c.features_per_split) : nlohmann::json()},
       {"bootstrap", c.bootstrap},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, ForestConfig& c) {
  if (auto it = j.find("trees"); it != j.end()) c.trees = it->get<std::size_t>();
  if (auto it = j.find("max_depth"); it != j.end())
    c.max_depth = it->is_null() ? std::nullopt : std::optional(it->get<std::size_t>());
  if (auto it = j.find("min_samples_split"); it != j.end())
    c.min_samples_split = it->get<std::size_t>();
  if (auto it = j.find("criterion"); it != j.end()) {
    auto text = it->get<std::string>();
    if (text == "gini")
      c.criterion = Criterion::gini;
    else if (text == "entropy")
      c.criterion = Criterion::entropy;
    else
      throw std::invalid_argument("criterion must be gini or entropy");
  }
  if (auto it = j.find("features_per_split"); it != j.end())
    c.features_per_split =
        it->is_null() ? std::nullopt : std::optional(it->get<std::size_t>());
  if (auto it = j.find("bootstrap"); it != j.end()) c.bootstrap = it->get<bool>();
  if (auto it = j.find("seed"); it != j.end()) c.seed = it->get<std::uint64_t>();
}

double impurity(const ClassCounts& counts, Criterion criterion) {
  const double total = static_cast<double>(counts[0]) + counts[1];
  if (total <= 0) throw std::invalid_argument("impurity of an empty node");
  double acc = 0.0;
  for (auto c : counts) {
    const double p = c / total;
    if (criterion == Criterion::gini)
      acc += p * p;
    else if (p > 0)
      acc -= p * std::log2(p);
  }
  return criterion == Criterion::gini ? 1.0 - acc : acc;
}

const TreeNode& DecisionTree::leaf_for(const FeatureVector& x) const {
  const TreeNode* node = &nodes_.at(0);
  while (!node->is_leaf()) node = &nodes_[x[node->feature] ? node->right : node->left];
  return *node;
}

double DecisionTree::malicious_fraction(const FeatureVector& x) const {
  const auto& c = leaf_for(x).counts;
  return static_cast<double>(c[1]) / (static_cast<double>(c[0]) + c[1]);
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes_[i].is_leaf()) {
      level[nodes_[i].left] = level[i] + 1;
      level[nodes_[i].right] = level[i] + 1;
    }
  }
  return deepest;
}

Prediction Forest::predict(const FeatureVector& x) const {
  if (x.size() != dimension_)
    throw std::invalid_argument("predict: expected " + std::to_string(dimension_) +
                                " features, got " + std::to_string(x.size()));
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.malicious_fraction(x);
  Prediction p;
  p.score = sum / static_cast<double>(trees_.size());
  p.label = p.score >= 0.5 ? Label::malicious : Label::legitimate;
  return p;
}

std::vector<Prediction> Forest::predict_all(std::span<const FeatureVector> rows) const {
  std::vector<Prediction> out(rows.size());
  parallel_for(rows.size(), [&](std::size_t i) { out[i] = predict(rows[i]); });
  return out;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(std::span<const FeatureVector> rows, std::span<const int> classes,
              const ForestConfig& config, std::uint64_t stream)
      : rows_(rows), classes_(classes), config_(config) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    rng_.seed(seq);
    dimension_ = rows.empty() ? 0 : rows[0].size();
    candidates_ = config.candidates_for(dimension_);
  }

  DecisionTree build() {
    const std::size_t n = rows_.size();
    std::vector<std::size_t> sample(n);
    if (config_.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& s : sample) s = pick(rng_);
    } else {
      std::iota(sample.begin(), sample.end(), 0);
    }
    grow(sample, 0);
    return DecisionTree(std::move(nodes_));
  }

 private:
  ClassCounts count(std::span<const std::size_t> idx) const {
    ClassCounts c{};
    for (auto i : idx) ++c[classes_[i]];
    return c;
  }

  double weighted(const ClassCounts& c) const {
    const double n = static_cast<double>(c[0]) + c[1];
    return n == 0 ? 0.0 : n * impurity(c, config_.criterion);
  }

  int grow(std::vector<std::size_t>& idx, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    const ClassCounts counts = count(idx);
    nodes_[id].counts = counts;

    const bool pure = counts[0] == 0 || counts[1] == 0;
    const bool too_deep = config_.max_depth && depth >= *config_.max_depth;
    if (pure || too_deep || idx.size() < config_.min_samples_split) return id;

    const double parent = weighted(counts);
    std::vector<std::size_t> order(dimension_);
    std::iota(order.begin(), order.end(), 0);

    // Draw features without replacement until enough non-constant ones
    // have been scored.
    int best_feature = -1;
    double best_child = parent;
    std::size_t scored = 0;
    for (std::size_t k = 0; k < dimension_ && scored < candidates_; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, dimension_ - 1);
      std::swap(order[k], order[pick(rng_)]);
      const std::size_t f = order[k];
      ClassCounts ones{};
      for (auto i : idx)
        if (rows_[i][f]) ++ones[classes_[i]];
      const std::size_t n_ones = ones[0] + ones[1];
      if (n_ones == 0 || n_ones == idx.size()) continue;
      ++scored;
      const ClassCounts zeros{counts[0] - ones[0], counts[1] - ones[1]};
      const double child = weighted(zeros) + weighted(ones);
      // Equal scores go to the lower feature index so the choice does not
      // depend on the draw order.
      const double tol = 1e-12 * std::max(1.0, parent);
      const bool better = child < best_child - tol;
      const bool tied = best_feature >= 0 && std::abs(child - best_child) <= tol &&
                        static_cast<int>(f) < best_feature;
      if (better || tied) {
        best_child = child;
        best_feature = static_cast<int>(f);
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto i : idx) (rows_[i][best_feature] ? right : left).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    nodes_[id].feature = best_feature;
    const int l = grow(left, depth + 1);
    nodes_[id].left = l;
    const int r = grow(right, depth + 1);
    nodes_[id].right = r;
    return id;
  }

  std::span<const FeatureVector> rows_;
  std::span<const int> classes_;
  const ForestConfig& config_;
  std::mt19937_64 rng_;
  std::size_t dimension_ = 0;
  std::size_t candidates_ = 0;
  std::vector<TreeNode> nodes_;
};

}  // namespace

Forest train_forest(std::span<const FeatureVector> rows, std::span<const Label> labels,
                    const ForestConfig& config) {
  config.validate();
  if (rows.size() != labels.size())
    throw std::invalid_argument("train_forest: rows and labels differ in length");
  if (rows.size() < 2) throw DegenerateError("train_forest: need at least two samples");
  const std::size_t d = rows[0].size();
  std::vector<int> classes(labels.size());
  bool seen[2] = {false, false};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (rows[i].size() != d) throw std::invalid_argument("train_forest: ragged feature rows");
    if (labels[i] == Label::unknown)
      throw std::invalid_argument("train_forest: unknown labels cannot be trained on");
    classes[i] = labels[i] == Label::malicious ? 1 : 0;
    seen[classes[i]] = true;
  }
  if (!seen[0] || !seen[1]) throw DegenerateError("train_forest: training data has one class");

  std::vector<DecisionTree> trees(config.trees);
  parallel_for(config.trees, [&](std::size_t t) {
    trees[t] = TreeBuilder(rows, classes, config, t).build();
  });
  return Forest(std::move(trees), d);
}

nlohmann::json forest_to_json(const Forest& f) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : f.trees()) {
    nlohmann::json feature = nlohmann::json::array(), left = nlohmann::json::array(),
                   right = nlohmann::json::array(), counts = nlohmann::json::array();
    for (const auto& n : t.nodes()) {
      feature.push_back(n.feature);
      left.push_back(n.left);
      right.push_back(n.right);
      counts.push_back({n.counts[0], n.counts[1]});
    }
    trees.push_back(
        {{"feature", feature}, {"left", left}, {"right", right}, {"counts", counts}});
  }
  return {{"dimension", f.dimension()}, {"trees", std::move(trees)}};
}

Forest forest_from_json(const nlohmann::json& j) {
  const auto d = j.at("dimension").get<std::size_t>();
  std::vector<DecisionTree> trees;
  for (const auto& t : j.at("trees")) {
    const auto& feature = t.at("feature");
    const auto& left = t.at("left");
    const auto& right = t.at("right");
    const auto& counts = t.at("counts");
    const std::size_t n = feature.size();
    if (n == 0 || left.size() != n || right.size() != n || counts.size() != n)
      throw ParseError("forest tree arrays are inconsistent");
    std::vector<TreeNode> nodes(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto& node = nodes[i];
      node.feature = feature[i].get<int>();
      node.left = left[i].get<int>();
      node.right = right[i].get<int>();
      node.counts = {counts[i].at(0).get<std::uint32_t>(), counts[i].at(1).get<std::uint32_t>()};
      // Children always follow their parent, which also rules out cycles.
      const auto in_range = [n, i](int c) {
        return c > static_cast<int>(i) && static_cast<std::size_t>(c) < n;
      };
      if (node.is_leaf()) {
        if (node.counts[0] + node.counts[1] == 0) throw ParseError("forest leaf without samples");
      } else if (static_cast<std::size_t>(node.feature) >= d || !in_range(node.left) ||
                 !in_range(node.right)) {
        throw ParseError("forest node references out of range");
      }
    }
    trees.emplace_back(std::move(nodes));
  }
  if (trees.empty()) throw ParseError("forest has no trees");
  return Forest(std::move(trees), d);
}

}  // namespace vmil
