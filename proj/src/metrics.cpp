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

#include "vmil/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "vmil/error.hpp"

namespace vmil {

RateReport confusion_rates(std::span<const Label> truth, std::span<const Label> predicted) {
  if (truth.empty() || truth.size() != predicted.size())
    throw std::invalid_argument("confusion_rates: need equal, non-empty label sequences");
  RateReport r;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == Label::unknown || predicted[i] == Label::unknown)
      throw std::invalid_argument("confusion_rates: unknown label");
    const bool positive = truth[i] == Label::malicious;
    const bool flagged = predicted[i] == Label::malicious;
    if (positive)
      ++(flagged ? r.tp : r.fn);
    else
      ++(flagged ? r.fp : r.tn);
  }
  const auto ratio = [](std::size_t num, std::size_t den) {
    return static_cast<double>(num) / static_cast<double>(den);
  };
  if (const std::size_t p = r.tp + r.fn; p > 0) {
    r.tpr = ratio(r.tp, p);
    r.fnr = ratio(r.fn, p);
  }
  if (const std::size_t n = r.tn + r.fp; n > 0) {
    r.tnr = ratio(r.tn, n);
    r.fpr = ratio(r.fp, n);
  }
  r.accuracy = ratio(r.tp + r.tn, truth.size());
  return r;
}

nlohmann::json rates_to_json(const RateReport& r) {
  const auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json();
  };
  return {{"TP", r.tp},        {"FN", r.fn},        {"TN", r.tn},
          {"FP", r.fp},        {"TPR", opt(r.tpr)}, {"FNR", opt(r.fnr)},
          {"TNR", opt(r.tnr)}, {"FPR", opt(r.fpr)}, {"ACC", r.accuracy}};
}

std::string rates_to_text(const RateReport& r) {
  std::ostringstream out;
  const auto line = [&](const char* name, const std::string& value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-4s %10s\n", name, value.c_str());
    out << buf;
  };
  const auto fmt = [](const std::optional<double>& v) {
    if (!v) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return std::string(buf);
  };
  line("TPR", fmt(r.tpr));
  line("FNR", fmt(r.fnr));
  line("TNR", fmt(r.tnr));
  line("FPR", fmt(r.fpr));
  line("ACC", fmt(r.accuracy));
  line("TP", std::to_string(r.tp));
  line("FN", std::to_string(r.fn));
  line("TN", std::to_string(r.tn));
  line("FP", std::to_string(r.fp));
  return out.str();
}

double adjusted_rand_index(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: size mismatch");
  if (a.size() < 2) throw std::invalid_argument("adjusted_rand_index: need at least two nodes");

  std::map<std::pair<int, int>, std::uint64_t> joint;
  std::map<int, std::uint64_t> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++joint[{a[i], b[i]}];
    ++rows[a[i]];
    ++cols[b[i]];
  }
  const auto pairs = [](std::uint64_t n) { return n * (n - 1) / 2; };
  std::uint64_t index = 0, sum_rows = 0, sum_cols = 0;
  for (const auto& [key, n] : joint) index += pairs(n);
  for (const auto& [key, n] : rows) sum_rows += pairs(n);
  for (const auto& [key, n] : cols) sum_cols += pairs(n);

  // (index - expected) / (max - expected) scaled by 2 * total pairs, so the
  // only rounding happens in the final division.
  using Wide = __int128;
  const Wide total = pairs(a.size());
  const Wide cross = static_cast<Wide>(sum_rows) * sum_cols;
  const Wide num = 2 * (static_cast<Wide>(index) * total - cross);
  const Wide den = (static_cast<Wide>(sum_rows) + sum_cols) * total - 2 * cross;
  if (den == 0) return 1.0;
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

std::vector<int> stratified_folds(std::span<const Label> labels, std::size_t folds,
                                  std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("stratified_folds: need at least two folds");
  std::map<Label, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  if (by_class.size() < 2) throw DegenerateError("stratified_folds: single-class data");

  std::mt19937_64 rng(seed);
  std::vector<int> fold(labels.size(), -1);
  std::size_t offset = 0;
  for (auto& [label, idx] : by_class) {
    if (idx.size() < folds)
      throw DegenerateError("stratified_folds: class '" + std::string(to_string(label)) +
                            "' has fewer samples than folds");
    std::shuffle(idx.begin(), idx.end(), rng);
    // Continue the deal where the previous class stopped so fold sizes stay
    // balanced overall too.
    for (std::size_t k = 0; k < idx.size(); ++k)
      fold[idx[k]] = static_cast<int>((offset + k) % folds);
    offset += idx.size();
  }
  return fold;
}

GridSearchResult kfold_grid_search(std::span<const FeatureVector> rows,
                                   std::span<const Label> labels,
                                   std::span<const ForestConfig> grid, std::size_t folds,
                                   std::uint64_t seed) {
  if (grid.empty()) throw std::invalid_argument("kfold_grid_search: empty grid");
  if (rows.size() != labels.size())
    throw std::invalid_argument("kfold_grid_search: rows and labels differ in length");
  const std::vector<int> fold = stratified_folds(labels, folds, seed);

  GridSearchResult result;
  for (const auto& config : grid) {
    GridCell cell{config, {}, 0.0};
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<FeatureVector> train_x, test_x;
      std::vector<Label> train_y, test_y;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const bool held_out = fold[i] == static_cast<int>(f);
        (held_out ? test_x : train_x).push_back(rows[i]);
        (held_out ? test_y : train_y).push_back(labels[i]);
      }
      const Forest forest = train_forest(train_x, train_y, config);
      std::vector<Label> predicted;
      for (const auto& p : forest.predict_all(test_x)) predicted.push_back(p.label);
      cell.fold_accuracy.push_back(confusion_rates(test_y, predicted).accuracy);
    }
    double sum = 0.0;
    for (double a : cell.fold_accuracy) sum += a;
    cell.mean_accuracy = sum / static_cast<double>(folds);
    result.cells.push_back(std::move(cell));
  }
  for (std::size_t i = 1; i < result.cells.size(); ++i)
    if (result.cells[i].mean_accuracy > result.cells[result.best_index].mean_accuracy)
      result.best_index = i;
  return result;
}

std::vector<ForestConfig> forest_grid(const ForestConfig& base,
                                      std::span<const std::size_t> trees,
                                      std::span<const std::optional<std::size_t>> max_depths,
                                      std::span<const std::size_t> min_splits,
                                      std::span<const Criterion> criteria) {
  std::vector<ForestConfig> out;
  for (auto t : trees)
    for (auto d : max_depths)
      for (auto s : min_splits)
        for (auto c : criteria) {
          ForestConfig cfg = base;
          cfg.trees = t;
          cfg.max_depth = d;
          cfg.min_samples_split = s;
          cfg.criterion = c;
          out.push_back(cfg);
        }
  return out;
}

nlohmann::json grid_to_json(const GridSearchResult& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells)
    cells.push_back({{"config", c.config},
                     {"fold_accuracy", c.fold_accuracy},
                     {"mean_accuracy", c.mean_accuracy}});
  return {{"best_index", r.best_index}, {"cells", std::move(cells)}};
}

}  // namespace vmil
