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
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vmil/ingest.hpp"
#include "vmil/similarity.hpp"

namespace vmil {

// Undirected weighted graph over names. Only pairs whose similarity exceeds
// the edge floor become edges; there are no self-loops.
struct SimilarityGraph {
  struct Edge {
    std::uint32_t to;
    double weight;
  };

  std::vector<std::string> names;
  std::vector<std::vector<Edge>> adjacency;  // sorted by neighbor index
  std::uint64_t evaluations = 0;             // similarity calls made while building

  std::size_t node_count() const { return names.size(); }
  std::size_t edge_count() const;
};

// Evaluates all n(n-1)/2 pairs.
SimilarityGraph build_similarity_graph(std::span<const std::string> names,
                                       const Similarity& sim, double edge_floor);
SimilarityGraph build_similarity_graph(std::span<const std::string> names,
                                       std::span<const PreparedName> prepared,
                                       const Similarity& sim, double edge_floor);

// Community index per node, contiguous from 0 and numbered by first
// appearance in node order.
using Partition = std::vector<int>;

double modularity(const SimilarityGraph& g, const Partition& p);

struct LouvainOptions {
  double tolerance = 1e-7;  // minimum modularity gain per level
  std::uint64_t seed = 0;   // node sweep order
};

struct LouvainResult {
  Partition partition;
  double modularity = 0.0;
  // Modularity after each aggregation level, starting with singletons.
  std::vector<double> level_modularity;
};

LouvainResult louvain(const SimilarityGraph& g, const LouvainOptions& options = {});
Partition louvain_partition(const SimilarityGraph& g, std::uint64_t seed = 0);

struct ClusterPrototype {
  int id = 0;
  ResourceType type = ResourceType::file;
  std::vector<std::string> members;  // sorted, at most m entries

  bool operator==(const ClusterPrototype&) const = default;
};

// One prototype per community with up to m members drawn uniformly without
// replacement. Prototype ids are first_id + community index.
std::vector<ClusterPrototype> make_prototypes(const Partition& p,
                                              std::span<const std::string> names,
                                              ResourceType type, std::size_t m,
                                              std::uint64_t seed, int first_id = 0);

struct NearestPrototype {
  std::size_t index = 0;  // position in the searched span
  int id = 0;
  double similarity = 0.0;
};

// Nearest-prototype queries over a fixed prototype set. The similarity of a
// name to a prototype is the maximum over the prototype's members; ties go
// to the lowest prototype id.
class PrototypeIndex {
 public:
  // Throws std::invalid_argument for an empty prototype set.
  PrototypeIndex(std::span<const ClusterPrototype> prototypes, const Similarity& sim);

  NearestPrototype nearest(const PreparedName& name) const;
  NearestPrototype nearest(std::string_view name) const;
  // Similarity evaluations performed by a single query.
  std::size_t evaluations_per_query() const { return members_.size(); }
  const Similarity& similarity() const { return sim_; }

 private:
  Similarity sim_;
  std::vector<int> ids_;
  std::vector<std::size_t> offsets_;  // members_ range per prototype
  std::vector<PreparedName> members_;
};

NearestPrototype nn_search(std::string_view name, std::span<const ClusterPrototype> prototypes,
                           const Similarity& sim);

struct ApproxConfig {
  std::size_t k = 100000;  // subset size clustered exactly per iteration
  std::size_t m = 10;      // prototype size cap
  double epsilon = 0.4;    // absorb threshold
  std::optional<double> edge_floor;  // defaults to epsilon
  std::uint64_t seed = 0;
  std::size_t max_iterations = 50;  // 0 disables the cap

  double floor() const { return edge_floor.value_or(epsilon); }
  // Throws std::invalid_argument when k < 2, m < 1 or epsilon is outside (0, 1).
  void validate() const;
};

void to_json(nlohmann::json& j, const ApproxConfig& c);
void from_json(const nlohmann::json& j, ApproxConfig& c);

enum class AssignmentKind {
  member,     // sampled into its community's prototype
  clustered,  // in the exactly clustered subset but not sampled
  absorbed,   // attached to the nearest prototype with similarity > epsilon
};

struct Assignment {
  std::string name;
  int prototype_id = 0;
  AssignmentKind kind = AssignmentKind::member;
  double similarity = 1.0;  // to the prototype; 1 for members
};

struct IterationStats {
  std::size_t remaining = 0;  // names left before the iteration
  std::size_t subset = 0;
  std::size_t prototypes = 0;
  std::size_t absorbed = 0;
  std::uint64_t evaluations = 0;
};

struct ApproxResult {
  std::vector<ClusterPrototype> prototypes;  // ordered by id
  std::vector<Assignment> assignments;       // one per input name, sorted by name
  std::vector<IterationStats> iterations;
  std::uint64_t evaluations = 0;

  // Prototype id per name, in the order of names.
  Partition labels_for(std::span<const std::string> names) const;
};

// Iterative subset clustering: draw min(k, |remaining|) names, cluster them
// exactly with Louvain, turn communities into prototypes, absorb every
// remaining name whose nearest prototype is closer than epsilon, repeat
// until nothing remains. Iteration l seeds Louvain and prototype sampling
// with seed + l. Throws DataError when max_iterations is exceeded.
ApproxResult approx_cluster(std::span<const std::string> names, ResourceType type,
                            const Similarity& sim, const ApproxConfig& config);

// {"rtype": ..., "prototypes": [{"id": int, "members": [string]}]}
nlohmann::json prototypes_to_json(ResourceType type,
                                  std::span<const ClusterPrototype> prototypes);
std::vector<ClusterPrototype> prototypes_from_json(const nlohmann::json& j);

}  // namespace vmil
