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

#include "vmil/vectorize.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "vmil/error.hpp"
#include "vmil/parallel.hpp"

namespace vmil {

std::span<const ClusterPrototype> Vocabulary::prototypes(ResourceType type) const {
  auto it = prototypes_.find(type);
  if (it == prototypes_.end()) return {};
  return it->second;
}

std::size_t Vocabulary::position(const Feature& f) const {
  auto it = positions_.find(f);
  if (it == positions_.end()) throw std::out_of_range("feature is not in the vocabulary");
  return it->second;
}

Vocabulary build_vocabulary(PrototypeMap prototypes) {
  Vocabulary v;
  std::size_t total = 0;
  for (auto& [type, list] : prototypes) {
    std::set<int> ids;
    for (const auto& p : list) {
      if (p.type != type)
        throw std::invalid_argument("build_vocabulary: prototype filed under the wrong type");
      if (!ids.insert(p.id).second)
        throw std::invalid_argument("build_vocabulary: duplicate prototype id");
    }
    std::sort(list.begin(), list.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    total += list.size();
  }
  if (total == 0) throw std::invalid_argument("build_vocabulary: no prototypes");

  for (auto it = prototypes.begin(); it != prototypes.end();) {
    if (it->second.empty())
      it = prototypes.erase(it);
    else
      ++it;
  }
  for (const auto& [type, list] : prototypes)
    for (const auto& p : list) v.features_.push_back(PrototypeFeature{type, p.id});
  for (auto w : kWarnings) v.features_.push_back(w);
  for (std::size_t i = 0; i < v.features_.size(); ++i) v.positions_.emplace(v.features_[i], i);
  v.prototypes_ = std::move(prototypes);
  return v;
}

nlohmann::json vocabulary_to_json(const Vocabulary& v) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : v.features()) {
    if (const auto* p = std::get_if<PrototypeFeature>(&f))
      features.push_back({{"rtype", to_string(p->type)}, {"prototype", p->prototype_id}});
    else
      features.push_back({{"warning", to_string(std::get<Warning>(f))}});
  }
  nlohmann::json sets = nlohmann::json::array();
  for (const auto& [type, list] : v.prototypes()) sets.push_back(prototypes_to_json(type, list));
  return {{"features", std::move(features)}, {"prototype_sets", std::move(sets)}};
}

Vocabulary vocabulary_from_json(const nlohmann::json& j) {
  PrototypeMap map;
  for (const auto& set : j.at("prototype_sets")) {
    auto list = prototypes_from_json(set);
    if (list.empty()) continue;
    auto type = list.front().type;
    auto& dst = map[type];
    dst.insert(dst.end(), list.begin(), list.end());
  }
  Vocabulary v = build_vocabulary(std::move(map));

  const auto& stored = j.at("features");
  if (stored.size() != v.size()) throw ParseError("vocabulary feature count mismatch");
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& f = v.features()[i];
    const auto& s = stored[i];
    bool same = false;
    if (const auto* p = std::get_if<PrototypeFeature>(&f))
      same = s.contains("rtype") && s.at("rtype") == to_string(p->type) &&
             s.at("prototype") == p->prototype_id;
    else
      same = s.contains("warning") && s.at("warning") == to_string(std::get<Warning>(f));
    if (!same) throw ParseError("vocabulary feature order mismatch at " + std::to_string(i));
  }
  return v;
}

SimilarityMap make_similarities(const SimilarityConfig& config) {
  SimilarityMap out;
  for (auto t : kResourceTypes) out.emplace(t, similarity_for_type(t, config));
  return out;
}

Projector::Projector(const Vocabulary& vocabulary, const SimilarityMap& sims,
                     ProjectionOptions options)
    : dimension_(vocabulary.size()), options_(options) {
  for (const auto& [type, list] : vocabulary.prototypes()) {
    auto sim = sims.find(type);
    if (sim == sims.end())
      throw std::invalid_argument("Projector: no similarity for type " +
                                  std::string(to_string(type)));
    TypeIndex entry{PrototypeIndex(list, sim->second), {}};
    for (const auto& p : list)
      entry.positions.push_back(vocabulary.position(PrototypeFeature{type, p.id}));
    indexes_.emplace(type, std::move(entry));
  }
  for (auto w : kWarnings) warning_positions_[w] = vocabulary.position(w);
}

FeatureVector Projector::project(const SandboxSample& s, ProjectionStats* stats) const {
  FeatureVector x(dimension_, 0);
  for (const auto& inst : s.instances) {
    auto it = indexes_.find(inst.type);
    if (it == indexes_.end()) {
      if (stats) ++stats->skipped;
      continue;
    }
    const auto hit = it->second.index.nearest(inst.name);
    if (options_.threshold && !(hit.similarity > *options_.threshold)) {
      if (stats) ++stats->below_threshold;
      continue;
    }
    x[it->second.positions[hit.index]] = 1;
  }
  for (auto w : s.warnings) x[warning_positions_.at(w)] = 1;
  return x;
}

std::vector<FeatureVector> Projector::project_all(std::span<const SandboxSample> samples,
                                                  ProjectionStats* stats) const {
  std::vector<FeatureVector> rows(samples.size());
  std::vector<ProjectionStats> local(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) { rows[i] = project(samples[i], &local[i]); });
  if (stats)
    for (const auto& l : local) {
      stats->skipped += l.skipped;
      stats->below_threshold += l.below_threshold;
    }
  return rows;
}

FeatureVector project_sample(const SandboxSample& s, const Vocabulary& v,
                             const SimilarityMap& sims, ProjectionOptions options) {
  return Projector(v, sims, options).project(s);
}

std::vector<FeatureVector> project_corpus(std::span<const SandboxSample> samples,
                                          const Vocabulary& v, const SimilarityMap& sims,
                                          ProjectionOptions options) {
  return Projector(v, sims, options).project_all(samples);
}

nlohmann::json sparse_row(const std::string& sample_id, const FeatureVector& x) {
  std::vector<std::size_t> bits;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i]) bits.push_back(i);
  return {{"sample_id", sample_id}, {"bits", bits}};
}

FeatureVector dense_row(const nlohmann::json& row, std::size_t dimension) {
  FeatureVector x(dimension, 0);
  for (const auto& b : row.at("bits")) {
    const auto i = b.get<std::size_t>();
    if (i >= dimension) throw ParseError("bit index out of range");
    x[i] = 1;
  }
  return x;
}

}  // namespace vmil
