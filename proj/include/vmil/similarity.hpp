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
#include <cstddef>
#include <functional>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vmil/ingest.hpp"

namespace vmil {

// Category of a single path fragment. `empty` only ever appears as padding
// while two paths of different depth are compared.
enum class FragmentCategory { known, general, file, empty };

char category_letter(FragmentCategory c);

struct Fragment {
  std::string text;
  FragmentCategory category;

  bool operator==(const Fragment&) const = default;
};

struct FragmentedPath {
  std::vector<Fragment> fragments;
  std::string original;

  std::size_t depth() const { return fragments.size(); }
};

// Slots of the fragment-difference vector, in storage order.
enum DiffSlot : std::size_t { kKK, kKG, kKF, kKE, kGG, kGF, kGE, kFF, kFE };
inline constexpr std::size_t kDiffDims = 9;

// Per-level differences between two fragmented paths. All slots except
// kGG and kFF are pair counts; those two accumulate normalized edit
// distances in [0, 1] per level.
using DiffVector = std::array<double, kDiffDims>;

// Non-negative weights of the path similarity exp(-w . f).
class WeightVector {
 public:
  // All ones.
  WeightVector();
  // Throws std::invalid_argument on a negative or non-finite component.
  explicit WeightVector(const std::array<double, kDiffDims>& values);

  // Weights shipped as the default for file and registry paths.
  static WeightVector defaults();
  // Clamps every component at zero instead of rejecting negatives.
  static WeightVector projected(const std::array<double, kDiffDims>& values);

  double operator[](std::size_t i) const { return values_[i]; }
  const std::array<double, kDiffDims>& values() const { return values_; }
  double dot(const DiffVector& f) const;

  bool operator==(const WeightVector&) const = default;

 private:
  std::array<double, kDiffDims> values_;
};

// Folder names the operating system imposes. Entries are stored lowercase
// and matched exactly against lowercased fragment text.
class KnownFolderList {
 public:
  KnownFolderList() = default;
  // Throws std::invalid_argument for empty names or names with separators.
  explicit KnownFolderList(std::span<const std::string> names);
  KnownFolderList(std::initializer_list<std::string> names);

  static KnownFolderList default_file();
  static KnownFolderList default_registry();

  bool contains(std::string_view lowercase_name) const;
  const std::set<std::string, std::less<>>& names() const { return names_; }
  bool operator==(const KnownFolderList&) const = default;

 private:
  std::set<std::string, std::less<>> names_;
};

// Splits on '\\' and '/', dropping empty fragments. With `lowercase` the
// stored fragment text is lowercased. The last fragment is a file; the
// others are known or general folders. Throws std::invalid_argument when
// nothing but separators remains.
FragmentedPath tokenize_and_classify(std::string_view path, const KnownFolderList& known,
                                     bool lowercase);

// Compares two paths level by level from the root, padding the shorter one
// with empty fragments at its deep end.
DiffVector diff_features(const FragmentedPath& a, const FragmentedPath& b);

// exp(-w . diff_features(a, b)), in (0, 1].
double path_similarity(const FragmentedPath& a, const FragmentedPath& b,
                       const WeightVector& w);

// Unit-cost edit distance over bytes.
std::size_t levenshtein(std::string_view a, std::string_view b);
// levenshtein / max(|a|, |b|); 0 for two empty strings.
double normalized_levenshtein(std::string_view a, std::string_view b);

// Lowercased host part of a URL or bare host name ("http://a.b:80/x" ->
// "a.b").
std::string hostname_of(std::string_view name);

// Similarity settings shared by all resource types, mirrored in the
// "file_*", "registry_*" and "lowercase" keys of the config file.
struct SimilarityConfig {
  KnownFolderList file_known = KnownFolderList::default_file();
  KnownFolderList registry_known = KnownFolderList::default_registry();
  WeightVector file_weights = WeightVector::defaults();
  WeightVector registry_weights = WeightVector::defaults();
  bool lowercase = true;

  bool operator==(const SimilarityConfig&) const = default;
};

void to_json(nlohmann::json& j, const SimilarityConfig& c);
// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, SimilarityConfig& c);

// A name preprocessed once so repeated comparisons skip tokenization.
struct PreparedName {
  std::string text;
  FragmentedPath path;
};

// Type-specific similarity over resource names, valued in [0, 1].
// Cheap to copy; safe to share between threads.
class Similarity {
 public:
  using Function = std::function<double(std::string_view, std::string_view)>;

  static Similarity paths(KnownFolderList known, WeightVector weights, bool lowercase);
  // 1 - normalized_levenshtein on the raw names.
  static Similarity edit_distance();
  // 1 - normalized_levenshtein on hostname_of() of each name.
  static Similarity hostnames();
  static Similarity custom(Function fn);

  PreparedName prepare(std::string_view name) const;
  std::vector<PreparedName> prepare_all(std::span<const std::string> names) const;
  double operator()(const PreparedName& a, const PreparedName& b) const;
  double operator()(std::string_view a, std::string_view b) const;

 private:
  enum class Kind { path, edit, host, custom };
  struct PathModel {
    KnownFolderList known;
    WeightVector weights;
    bool lowercase;
  };

  explicit Similarity(Kind kind) : kind_(kind) {}

  Kind kind_;
  std::shared_ptr<const PathModel> model_;
  Function custom_;
};

// file and registry use path similarity with their own folder lists and
// weights; mutex uses edit distance; network uses edit distance over host
// names.
Similarity similarity_for_type(ResourceType type, const SimilarityConfig& config);

}  // namespace vmil
