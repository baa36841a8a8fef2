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

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vmil/similarity.hpp"

namespace vmil {

using Matrix = Eigen::MatrixXd;

// Sum of elementwise products. Throws std::invalid_argument when the shapes
// differ.
double frobenius_product(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& a);

// Subtracts row and column means and adds back the grand mean, i.e. H S H
// with H = I - 11'/m. Throws std::invalid_argument for non-square input.
Matrix center_kernel(const Matrix& s);

// +1 where the classes agree, -1 elsewhere. Needs at least two entries.
Matrix target_kernel(std::span<const int> classes);

// Cosine between the centered kernel and the centered target. Throws
// DegenerateError when either centered matrix vanishes (constant kernel,
// single class).
double alignment(const Matrix& s, const Matrix& y);

struct LabeledPath {
  std::string path;
  int class_id = 0;
};

// Training data for weight learning: at least two paths, two classes.
class LabeledPathSet {
 public:
  // Throws DataError when the set is too small or single-class.
  explicit LabeledPathSet(std::vector<LabeledPath> items);

  const std::vector<LabeledPath>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  std::vector<int> classes() const;

 private:
  std::vector<LabeledPath> items_;
};

// JSONL records {"path": string, "class": int}.
LabeledPathSet load_labeled_paths(const std::string& file);
void write_labeled_paths(std::ostream& out, std::span<const LabeledPath> items);

// S_ij = exp(-w . f(x_i, x_j)).
Matrix kernel_matrix(std::span<const FragmentedPath> paths, const WeightVector& w);

double path_alignment(std::span<const FragmentedPath> paths, std::span<const int> classes,
                      const WeightVector& w);

// Gradient of path_alignment with respect to w, using
// dS_ij/dw_k = -f_k(x_i, x_j) S_ij. Throws DegenerateError for single-class
// batches or a vanishing centered kernel.
std::array<double, kDiffDims> alignment_gradient(const WeightVector& w,
                                                 std::span<const FragmentedPath> paths,
                                                 std::span<const int> classes);

struct OptimizerConfig {
  std::size_t batch_size = 64;
  std::size_t epochs = 50;
  double learning_rate = 0.1;  // decays as 1/sqrt(step)
  WeightVector initial_w;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument when batch_size < 4 or learning_rate <= 0.
  void validate() const;
};

void to_json(nlohmann::json& j, const OptimizerConfig& c);
void from_json(const nlohmann::json& j, OptimizerConfig& c);

struct OptimizationResult {
  WeightVector weights;
  double initial_alignment = 0.0;
  double final_alignment = 0.0;
  std::size_t steps = 0;
};

// Projected stochastic gradient ascent on the alignment. Each epoch runs
// ceil(m / batch_size) steps on batches drawn uniformly with replacement,
// then scores the full data; the best-scoring iterate (the initial weights
// included) is returned, so the result never aligns worse than the start.
OptimizationResult optimize_weights(const LabeledPathSet& data, const KnownFolderList& known,
                                    bool lowercase, const OptimizerConfig& config);

}  // namespace vmil
