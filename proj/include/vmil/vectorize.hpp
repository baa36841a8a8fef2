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

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "vmil/clustering.hpp"
#include "vmil/ingest.hpp"
#include "vmil/similarity.hpp"

namespace vmil {

struct PrototypeFeature {
  ResourceType type;
  int prototype_id;

  auto operator<=>(const PrototypeFeature&) const = default;
};

// A vocabulary entry: a cluster prototype of some type, or a sandbox
// warning, which always forms a cluster of its own.
using Feature = std::variant<PrototypeFeature, Warning>;

using PrototypeMap = std::map<ResourceType, std::vector<ClusterPrototype>>;

// Ordered feature space: prototypes by type then id, the three warnings
// last.
class Vocabulary {
 public:
  Vocabulary() = default;

  std::size_t size() const { return features_.size(); }
  const std::vector<Feature>& features() const { return features_; }
  const PrototypeMap& prototypes() const { return prototypes_; }
  std::span<const ClusterPrototype> prototypes(ResourceType type) const;

  // Throws std::out_of_range for features outside the vocabulary.
  std::size_t position(const Feature& f) const;

  bool operator==(const Vocabulary& other) const {
    return features_ == other.features_ && prototypes_ == other.prototypes_;
  }

 private:
  friend Vocabulary build_vocabulary(PrototypeMap prototypes);

  std::vector<Feature> features_;
  std::map<Feature, std::size_t> positions_;
  PrototypeMap prototypes_;
};

// Throws std::invalid_argument when no type has a prototype, when a
// prototype is filed under the wrong type, or when ids repeat within a type.
Vocabulary build_vocabulary(PrototypeMap prototypes);

// {"features": [...], "prototype_sets": [<prototype set>...]}. Feature order
// is stored explicitly and checked on load.
nlohmann::json vocabulary_to_json(const Vocabulary& v);
Vocabulary vocabulary_from_json(const nlohmann::json& j);

using FeatureVector = std::vector<std::uint8_t>;
using SimilarityMap = std::map<ResourceType, Similarity>;

SimilarityMap make_similarities(const SimilarityConfig& config);

struct ProjectionOptions {
  // When set, an instance only lights its nearest prototype if the
  // similarity exceeds this value. Unset means always.
  std::optional<double> threshold;
};

struct ProjectionStats {
  std::size_t skipped = 0;          // instances of a type without prototypes
  std::size_t below_threshold = 0;  // instances rejected by the threshold
};

// Projects samples onto a fixed vocabulary. Prototype members are prepared
// once; projection is read-only afterwards and safe to run concurrently.
class Projector {
 public:
  Projector(const Vocabulary& vocabulary, const SimilarityMap& sims,
            ProjectionOptions options = {});

  FeatureVector project(const SandboxSample& s, ProjectionStats* stats = nullptr) const;
  // Rows follow the input order.
  std::vector<FeatureVector> project_all(std::span<const SandboxSample> samples,
                                         ProjectionStats* stats = nullptr) const;
  std::size_t dimension() const { return dimension_; }

 private:
  struct TypeIndex {
    PrototypeIndex index;
    std::vector<std::size_t> positions;  // vocabulary position per prototype
  };

  std::size_t dimension_;
  std::map<ResourceType, TypeIndex> indexes_;
  std::map<Warning, std::size_t> warning_positions_;
  ProjectionOptions options_;
};

FeatureVector project_sample(const SandboxSample& s, const Vocabulary& v,
                             const SimilarityMap& sims, ProjectionOptions options = {});
std::vector<FeatureVector> project_corpus(std::span<const SandboxSample> samples,
                                          const Vocabulary& v, const SimilarityMap& sims,
                                          ProjectionOptions options = {});

// Sparse row form {"sample_id": ..., "bits": [indices of ones]}.
nlohmann::json sparse_row(const std::string& sample_id, const FeatureVector& x);
FeatureVector dense_row(const nlohmann::json& row, std::size_t dimension);

}  // namespace vmil
