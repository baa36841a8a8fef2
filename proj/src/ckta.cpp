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

#include "vmil/ckta.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "vmil/error.hpp"
#include "vmil/parallel.hpp"

namespace vmil {

double frobenius_product(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("frobenius_product: shape mismatch");
  return a.cwiseProduct(b).sum();
}

double frobenius_norm(const Matrix& a) { return std::sqrt(frobenius_product(a, a)); }

Matrix center_kernel(const Matrix& s) {
  if (s.rows() != s.cols()) throw std::invalid_argument("center_kernel: matrix is not square");
  if (s.rows() == 0) return s;
  const Eigen::VectorXd col_means = s.colwise().mean().transpose();
  const Eigen::VectorXd row_means = s.rowwise().mean();
  const double grand = s.mean();
  Matrix c = s;
  c.colwise() -= row_means;
  c.rowwise() -= col_means.transpose();
  c.array() += grand;
  return c;
}

Matrix target_kernel(std::span<const int> classes) {
  const auto m = static_cast<Eigen::Index>(classes.size());
  if (m < 2) throw std::invalid_argument("target_kernel: need at least two labels");
  Matrix y(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) y(i, j) = classes[i] == classes[j] ? 1.0 : -1.0;
  return y;
}

namespace {

bool vanishes(const Matrix& centered, const Matrix& original) {
  return frobenius_norm(centered) <= 1e-10 * std::max(1.0, frobenius_norm(original));
}

}  // namespace

double alignment(const Matrix& s, const Matrix& y) {
  if (s.rows() != y.rows() || s.cols() != y.cols())
    throw std::invalid_argument("alignment: shape mismatch");
  const Matrix sc = center_kernel(s);
  const Matrix yc = center_kernel(y);
  if (vanishes(sc, s)) throw DegenerateError("alignment: centered kernel is zero");
  if (vanishes(yc, y)) throw DegenerateError("alignment: centered target is zero");
  return frobenius_product(sc, yc) / (frobenius_norm(sc) * frobenius_norm(yc));
}

LabeledPathSet::LabeledPathSet(std::vector<LabeledPath> items) : items_(std::move(items)) {
  if (items_.size() < 2) throw DataError("labeled path set needs at least two paths");
  std::set<int> distinct;
  for (const auto& it : items_) distinct.insert(it.class_id);
  if (distinct.size() < 2) throw DegenerateError("labeled path set has a single class");
}

std::vector<int> LabeledPathSet::classes() const {
  std::vector<int> out;
  out.reserve(items_.size());
  for (const auto& it : items_) out.push_back(it.class_id);
  return out;
}

LabeledPathSet load_labeled_paths(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open labeled path file '" + file + "'");
  std::vector<LabeledPath> items;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      LabeledPath p{j.at("path").get<std::string>(), j.at("class").get<int>()};
      if (p.path.empty()) throw ParseError("empty path", n);
      items.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(file + ": " + e.what(), n);
    }
  }
  return LabeledPathSet(std::move(items));
}

void write_labeled_paths(std::ostream& out, std::span<const LabeledPath> items) {
  for (const auto& it : items)
    out << nlohmann::json{{"path", it.path}, {"class", it.class_id}}.dump() << '\n';
}

namespace {

// Pairwise difference vectors of a batch, upper triangle only.
class PairFeatures {
 public:
  explicit PairFeatures(std::span<const FragmentedPath> paths)
      : m_(paths.size()), f_(m_ * m_) {
    parallel_for(m_, [&](std::size_t i) {
      for (std::size_t j = i + 1; j < m_; ++j) f_[i * m_ + j] = diff_features(paths[i], paths[j]);
    });
  }

  std::size_t size() const { return m_; }
  const DiffVector& at(std::size_t i, std::size_t j) const {
    return i < j ? f_[i * m_ + j] : f_[j * m_ + i];
  }

  Matrix kernel(const WeightVector& w) const {
    const auto m = static_cast<Eigen::Index>(m_);
    Matrix s = Matrix::Identity(m, m);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = i + 1; j < m_; ++j) {
        const double v = std::exp(-w.dot(f_[i * m_ + j]));
        s(i, j) = v;
        s(j, i) = v;
      }
    return s;
  }

 private:
  std::size_t m_;
  std::vector<DiffVector> f_;
};

std::array<double, kDiffDims> gradient_from_features(const WeightVector& w,
                                                     const PairFeatures& pf,
                                                     std::span<const int> classes) {
  const Matrix s = pf.kernel(w);
  const Matrix y = target_kernel(classes);
  const Matrix sc = center_kernel(s);
  const Matrix yc = center_kernel(y);
  if (vanishes(yc, y)) throw DegenerateError("alignment gradient: batch has a single class");
  if (vanishes(sc, s)) throw DegenerateError("alignment gradient: centered kernel is zero");

  const double sc_norm = frobenius_norm(sc);
  const double yc_norm = frobenius_norm(yc);
  // <S_c, Y_c> = <S, Y_c> and ||S_c||^2 = <S, S_c> because centering is an
  // orthogonal projection; the same identities give the derivatives below.
  const double numer = frobenius_product(sc, yc);

  std::array<double, kDiffDims> d_numer{}, d_norm_sq_half{};
  const std::size_t m = pf.size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      const DiffVector& f = pf.at(i, j);
      const double sij = s(ii, jj);
      // Both (i, j) and (j, i) contribute.
      const double yc_ij = yc(ii, jj) + yc(jj, ii);
      const double sc_ij = sc(ii, jj) + sc(jj, ii);
      for (std::size_t k = 0; k < kDiffDims; ++k) {
        if (f[k] == 0.0) continue;
        const double dsk = -f[k] * sij;
        d_numer[k] += dsk * yc_ij;
        d_norm_sq_half[k] += dsk * sc_ij;
      }
    }

  std::array<double, kDiffDims> grad{};
  for (std::size_t k = 0; k < kDiffDims; ++k)
    grad[k] = (d_numer[k] / sc_norm - numer * d_norm_sq_half[k] / (sc_norm * sc_norm * sc_norm)) /
              yc_norm;
  return grad;
}

}  // namespace

Matrix kernel_matrix(std::span<const FragmentedPath> paths, const WeightVector& w) {
  return PairFeatures(paths).kernel(w);
}

double path_alignment(std::span<const FragmentedPath> paths, std::span<const int> classes,
                      const WeightVector& w) {
  if (paths.size() != classes.size())
    throw std::invalid_argument("path_alignment: paths and classes differ in length");
  return alignment(kernel_matrix(paths, w), target_kernel(classes));
}

std::array<double, kDiffDims> alignment_gradient(const WeightVector& w,
                                                 std::span<const FragmentedPath> paths,
                                                 std::span<const int> classes) {
  if (paths.size() != classes.size())
    throw std::invalid_argument("alignment_gradient: paths and classes differ in length");
  if (paths.size() < 2) throw DegenerateError("alignment gradient: batch too small");
  return gradient_from_features(w, PairFeatures(paths), classes);
}

void OptimizerConfig::validate() const {
  if (batch_size < 4) throw std::invalid_argument("optimizer batch_size must be at least 4");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("optimizer learning_rate must be positive");
}

void to_json(nlohmann::json& j, const OptimizerConfig& c) {
  j = {{"batch_size", c.batch_size},         {"epochs", c.epochs},
       {"learning_rate", c.learning_rate},   {"initial_w", c.initial_w.values()},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, OptimizerConfig& c) {
  if (auto it = j.find("batch_size"); it != j.end()) c.batch_size = it->get<std::size_t>();
  if (auto it = j.find("epochs"); it != j.end()) c.epochs = it->get<std::size_t>();
  if (auto it = j.find("learning_rate"); it != j.end()) c.learning_rate = it->get<double>();
  if (auto it = j.find("initial_w"); it != j.end()) {
    auto v = it->get<std::vector<double>>();
    if (v.size() != kDiffDims) throw std::invalid_argument("initial_w must have 9 entries");
    std::array<double, kDiffDims> a{};
    std::copy(v.begin(), v.end(), a.begin());
    c.initial_w = WeightVector(a);
  }
  if (auto it = j.find("seed"); it != j.end()) c.seed = it->get<std::uint64_t>();
}

OptimizationResult optimize_weights(const LabeledPathSet& data, const KnownFolderList& known,
                                    bool lowercase, const OptimizerConfig& config) {
  config.validate();
  const auto& items = data.items();
  const std::size_t m = items.size();
  std::vector<FragmentedPath> paths;
  paths.reserve(m);
  for (const auto& it : items) paths.push_back(tokenize_and_classify(it.path, known, lowercase));
  const std::vector<int> classes = data.classes();

  const PairFeatures full(paths);
  const Matrix y = target_kernel(classes);
  auto full_alignment = [&](const WeightVector& w) {
    try {
      return alignment(full.kernel(w), y);
    } catch (const DegenerateError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  OptimizationResult result;
  result.weights = config.initial_w;
  result.initial_alignment = alignment(full.kernel(config.initial_w), y);
  result.final_alignment = result.initial_alignment;

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  const std::size_t steps_per_epoch = (m + config.batch_size - 1) / config.batch_size;

  WeightVector w = config.initial_w;
  std::vector<FragmentedPath> batch_paths(config.batch_size);
  std::vector<int> batch_classes(config.batch_size);
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t step = 0; step < steps_per_epoch; ++step) {
      ++t;
      for (std::size_t b = 0; b < config.batch_size; ++b) {
        const std::size_t idx = pick(rng);
        batch_paths[b] = paths[idx];
        batch_classes[b] = classes[idx];
      }
      std::array<double, kDiffDims> grad;
      try {
        grad = gradient_from_features(w, PairFeatures(batch_paths), batch_classes);
      } catch (const DegenerateError&) {
        continue;  // single-class draw; the step is skipped
      }
      const double lr = config.learning_rate / std::sqrt(static_cast<double>(t));
      auto next = w.values();
      for (std::size_t k = 0; k < kDiffDims; ++k) next[k] += lr * grad[k];
      w = WeightVector::projected(next);
    }
    const double a = full_alignment(w);
    if (a > result.final_alignment) {
      result.final_alignment = a;
      result.weights = w;
    }
  }
  result.steps = t;
  return result;
}

}  // namespace vmil
