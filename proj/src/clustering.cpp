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

#include "vmil/clustering.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "vmil/error.hpp"
#include "vmil/parallel.hpp"

namespace vmil {

std::size_t SimilarityGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& row : adjacency) twice += row.size();
  return twice / 2;
}

SimilarityGraph build_similarity_graph(std::span<const std::string> names,
                                       std::span<const PreparedName> prepared,
                                       const Similarity& sim, double edge_floor) {
  if (names.size() != prepared.size())
    throw std::invalid_argument("build_similarity_graph: names and prepared names differ");
  const std::size_t n = names.size();
  SimilarityGraph g;
  g.names.assign(names.begin(), names.end());
  g.adjacency.resize(n);

  // Row i holds the pairs (i, j > i); mirrored afterwards.
  std::vector<std::vector<SimilarityGraph::Edge>> upper(n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = sim(prepared[i], prepared[j]);
      if (s > edge_floor) upper[i].push_back({static_cast<std::uint32_t>(j), s});
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& e : upper[i]) {
      g.adjacency[i].push_back(e);
      g.adjacency[e.to].push_back({static_cast<std::uint32_t>(i), e.weight});
    }
  for (auto& row : g.adjacency)
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.to < b.to; });
  g.evaluations = static_cast<std::uint64_t>(n) * (n > 0 ? n - 1 : 0) / 2;
  return g;
}

SimilarityGraph build_similarity_graph(std::span<const std::string> names,
                                       const Similarity& sim, double edge_floor) {
  auto prepared = sim.prepare_all(names);
  return build_similarity_graph(names, prepared, sim, edge_floor);
}

namespace {

Partition canonical(const std::vector<int>& raw) {
  std::unordered_map<int, int> renumber;
  Partition out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [it, inserted] = renumber.emplace(raw[i], static_cast<int>(renumber.size()));
    out[i] = it->second;
  }
  return out;
}

// Working graph for one Louvain level. Self-loops carry the internal weight
// of aggregated communities.
struct LevelGraph {
  std::vector<std::vector<std::pair<int, double>>> adj;
  std::vector<double> self_loop;
  std::vector<double> degree;
  double total = 0.0;  // sum of degrees, i.e. 2W

  std::size_t size() const { return adj.size(); }

  void finish() {
    degree.assign(size(), 0.0);
    total = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      degree[i] = self_loop[i];
      for (const auto& [j, w] : adj[i]) degree[i] += w;
      total += degree[i];
    }
  }
};

double level_modularity(const LevelGraph& g, const std::vector<int>& community) {
  if (g.total <= 0.0) return 0.0;
  std::unordered_map<int, double> inside, tot;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const int c = community[i];
    tot[c] += g.degree[i];
    inside[c] += g.self_loop[i];
    for (const auto& [j, w] : g.adj[i])
      if (community[j] == c) inside[c] += w;
  }
  double q = 0.0;
  for (const auto& [c, t] : tot) q += inside[c] / g.total - (t / g.total) * (t / g.total);
  return q;
}

// Greedy local moves until a sweep gains less than the tolerance. Returns
// true if any node changed community.
bool local_moves(const LevelGraph& g, std::vector<int>& community, double tolerance,
                 std::mt19937_64& rng) {
  const std::size_t n = g.size();
  std::vector<double> tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) tot[community[i]] += g.degree[i];

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> link(n, 0.0);
  std::vector<int> touched;
  bool moved_any = false;
  double q = level_modularity(g, community);
  for (;;) {
    bool moved = false;
    for (std::size_t i : order) {
      const int own = community[i];
      const double ki = g.degree[i];
      for (const auto& [j, w] : g.adj[i]) {
        const int c = community[j];
        if (link[c] == 0.0) touched.push_back(c);
        link[c] += w;
      }
      tot[own] -= ki;
      int best = own;
      double best_gain = link[own] - tot[own] * ki / g.total;
      for (int c : touched) {
        const double gain = link[c] - tot[c] * ki / g.total;
        if (gain > best_gain + 1e-12) {
          best = c;
          best_gain = gain;
        }
      }
      tot[best] += ki;
      if (best != own) {
        community[i] = best;
        moved = true;
      }
      for (int c : touched) link[c] = 0.0;
      touched.clear();
    }
    if (!moved) break;
    moved_any = true;
    const double next = level_modularity(g, community);
    const double gain = next - q;
    q = next;
    if (gain < tolerance) break;
  }
  return moved_any;
}

LevelGraph aggregate(const LevelGraph& g, const std::vector<int>& community, int count) {
  LevelGraph out;
  out.adj.resize(count);
  out.self_loop.assign(count, 0.0);
  std::vector<std::map<int, double>> merged(count);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const int ci = community[i];
    out.self_loop[ci] += g.self_loop[i];
    for (const auto& [j, w] : g.adj[i]) {
      const int cj = community[j];
      if (cj == ci)
        out.self_loop[ci] += w;  // each internal edge is seen from both ends
      else
        merged[ci][cj] += w;
    }
  }
  for (int c = 0; c < count; ++c) out.adj[c].assign(merged[c].begin(), merged[c].end());
  out.finish();
  return out;
}

}  // namespace

double modularity(const SimilarityGraph& g, const Partition& p) {
  if (p.size() != g.node_count())
    throw std::invalid_argument("modularity: partition size differs from graph");
  LevelGraph lg;
  lg.adj.resize(g.node_count());
  lg.self_loop.assign(g.node_count(), 0.0);
  for (std::size_t i = 0; i < g.node_count(); ++i)
    for (const auto& e : g.adjacency[i]) lg.adj[i].emplace_back(static_cast<int>(e.to), e.weight);
  lg.finish();
  return level_modularity(lg, p);
}

LouvainResult louvain(const SimilarityGraph& g, const LouvainOptions& options) {
  const std::size_t n = g.node_count();
  if (n == 0) throw std::invalid_argument("louvain: empty graph");

  LevelGraph level;
  level.adj.resize(n);
  level.self_loop.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& e : g.adjacency[i])
      level.adj[i].emplace_back(static_cast<int>(e.to), e.weight);
  level.finish();

  // node -> community in the current level's numbering
  std::vector<int> assignment(n);
  std::iota(assignment.begin(), assignment.end(), 0);

  LouvainResult result;
  std::vector<int> singletons(n);
  std::iota(singletons.begin(), singletons.end(), 0);
  double q = level_modularity(level, singletons);
  result.level_modularity.push_back(q);
  if (level.total <= 0.0) {
    result.partition = canonical(assignment);
    result.modularity = q;
    return result;
  }

  std::mt19937_64 rng(options.seed);
  for (;;) {
    std::vector<int> community(level.size());
    std::iota(community.begin(), community.end(), 0);
    if (!local_moves(level, community, options.tolerance, rng)) break;

    Partition compact = canonical(community);
    const double next = level_modularity(level, compact);
    if (next - q < options.tolerance) break;
    q = next;
    result.level_modularity.push_back(q);

    for (int& a : assignment) a = compact[a];
    const int count = *std::max_element(compact.begin(), compact.end()) + 1;
    level = aggregate(level, compact, count);
  }

  result.partition = canonical(assignment);
  result.modularity = modularity(g, result.partition);
  return result;
}

Partition louvain_partition(const SimilarityGraph& g, std::uint64_t seed) {
  return louvain(g, LouvainOptions{1e-7, seed}).partition;
}

std::vector<ClusterPrototype> make_prototypes(const Partition& p,
                                              std::span<const std::string> names,
                                              ResourceType type, std::size_t m,
                                              std::uint64_t seed, int first_id) {
  if (m < 1) throw std::invalid_argument("make_prototypes: m must be at least 1");
  if (p.size() != names.size())
    throw std::invalid_argument("make_prototypes: partition size differs from names");
  const int count = p.empty() ? 0 : *std::max_element(p.begin(), p.end()) + 1;
  std::vector<std::vector<std::size_t>> groups(count);
  for (std::size_t i = 0; i < p.size(); ++i) groups[p[i]].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<ClusterPrototype> out;
  out.reserve(count);
  for (int c = 0; c < count; ++c) {
    std::vector<std::size_t> picked;
    std::sample(groups[c].begin(), groups[c].end(), std::back_inserter(picked), m, rng);
    ClusterPrototype proto{first_id + c, type, {}};
    for (std::size_t i : picked) proto.members.push_back(names[i]);
    std::sort(proto.members.begin(), proto.members.end());
    out.push_back(std::move(proto));
  }
  return out;
}

PrototypeIndex::PrototypeIndex(std::span<const ClusterPrototype> prototypes,
                               const Similarity& sim)
    : sim_(sim) {
  if (prototypes.empty()) throw std::invalid_argument("nearest-prototype search: no prototypes");
  offsets_.push_back(0);
  for (const auto& p : prototypes) {
    ids_.push_back(p.id);
    for (const auto& name : p.members) members_.push_back(sim_.prepare(name));
    offsets_.push_back(members_.size());
  }
}

NearestPrototype PrototypeIndex::nearest(const PreparedName& name) const {
  NearestPrototype best{0, ids_[0], -1.0};
  for (std::size_t p = 0; p < ids_.size(); ++p) {
    double score = -1.0;
    for (std::size_t k = offsets_[p]; k < offsets_[p + 1]; ++k)
      score = std::max(score, sim_(name, members_[k]));
    if (score > best.similarity || (score == best.similarity && ids_[p] < best.id))
      best = {p, ids_[p], score};
  }
  return best;
}

NearestPrototype PrototypeIndex::nearest(std::string_view name) const {
  return nearest(sim_.prepare(name));
}

NearestPrototype nn_search(std::string_view name, std::span<const ClusterPrototype> prototypes,
                           const Similarity& sim) {
  return PrototypeIndex(prototypes, sim).nearest(name);
}

void ApproxConfig::validate() const {
  if (k < 2) throw std::invalid_argument("clustering k must be at least 2");
  if (m < 1) throw std::invalid_argument("clustering m must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("clustering epsilon must lie in (0, 1)");
}

void to_json(nlohmann::json& j, const ApproxConfig& c) {
  j = {{"k", c.k}, {"m", c.m}, {"epsilon", c.epsilon}, {"seed", c.seed},
       {"max_iterations", c.max_iterations}};
  if (c.edge_floor) j["edge_floor"] = *c.edge_floor;
}

void from_json(const nlohmann::json& j, ApproxConfig& c) {
  if (auto it = j.find("k"); it != j.end()) c.k = it->get<std::size_t>();
  if (auto it = j.find("m"); it != j.end()) c.m = it->get<std::size_t>();
  if (auto it = j.find("epsilon"); it != j.end()) c.epsilon = it->get<double>();
  if (auto it = j.find("edge_floor"); it != j.end() && !it->is_null())
    c.edge_floor = it->get<double>();
  if (auto it = j.find("seed"); it != j.end()) c.seed = it->get<std::uint64_t>();
  if (auto it = j.find("max_iterations"); it != j.end())
    c.max_iterations = it->get<std::size_t>();
}

Partition ApproxResult::labels_for(std::span<const std::string> names) const {
  Partition out;
  out.reserve(names.size());
  for (const auto& name : names) {
    auto it = std::lower_bound(assignments.begin(), assignments.end(), name,
                               [](const Assignment& a, const std::string& n) { return a.name < n; });
    if (it == assignments.end() || it->name != name)
      throw std::invalid_argument("labels_for: name '" + name + "' was not clustered");
    out.push_back(it->prototype_id);
  }
  return out;
}

ApproxResult approx_cluster(std::span<const std::string> names, ResourceType type,
                            const Similarity& sim, const ApproxConfig& config) {
  config.validate();
  std::vector<std::string> pool(names.begin(), names.end());
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  if (pool.empty()) throw std::invalid_argument("approx_cluster: no names");

  std::vector<PreparedName> prepared(pool.size());
  parallel_for(pool.size(), [&](std::size_t i) { prepared[i] = sim.prepare(pool[i]); });

  ApproxResult result;
  std::mt19937_64 subset_rng(config.seed);
  // Indices into pool, kept sorted so each iteration sees a canonical order.
  std::vector<std::size_t> remaining(pool.size());
  std::iota(remaining.begin(), remaining.end(), 0);
  int next_id = 0;

  for (std::size_t iteration = 0; !remaining.empty(); ++iteration) {
    if (config.max_iterations != 0 && iteration >= config.max_iterations)
      throw DataError("approx_cluster: " + std::to_string(remaining.size()) +
                      " names still unclustered after " + std::to_string(iteration) +
                      " iterations; increase k or lower epsilon");
    IterationStats stats;
    stats.remaining = remaining.size();

    std::vector<std::size_t> subset, rest;
    if (remaining.size() <= config.k) {
      subset = remaining;
    } else {
      std::vector<std::size_t> shuffled = remaining;
      for (std::size_t i = 0; i < config.k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, shuffled.size() - 1);
        std::swap(shuffled[i], shuffled[pick(subset_rng)]);
      }
      subset.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(config.k));
      std::sort(subset.begin(), subset.end());
      std::set_difference(remaining.begin(), remaining.end(), subset.begin(), subset.end(),
                          std::back_inserter(rest));
    }
    stats.subset = subset.size();

    std::vector<std::string> sub_names;
    std::vector<PreparedName> sub_prepared;
    for (std::size_t i : subset) {
      sub_names.push_back(pool[i]);
      sub_prepared.push_back(prepared[i]);
    }
    const std::uint64_t iter_seed = config.seed + iteration;
    SimilarityGraph graph = build_similarity_graph(sub_names, sub_prepared, sim, config.floor());
    stats.evaluations += graph.evaluations;
    Partition part = louvain_partition(graph, iter_seed);
    auto protos = make_prototypes(part, sub_names, type, config.m, iter_seed, next_id);
    next_id += static_cast<int>(protos.size());
    stats.prototypes = protos.size();

    for (std::size_t s = 0; s < subset.size(); ++s) {
      const auto& proto = protos[part[s]];
      const bool sampled =
          std::binary_search(proto.members.begin(), proto.members.end(), sub_names[s]);
      result.assignments.push_back({sub_names[s], proto.id,
                                    sampled ? AssignmentKind::member : AssignmentKind::clustered,
                                    1.0});
    }

    std::vector<std::size_t> still_remaining;
    if (!rest.empty()) {
      PrototypeIndex index(protos, sim);
      std::vector<NearestPrototype> hits(rest.size());
      parallel_for(rest.size(), [&](std::size_t r) { hits[r] = index.nearest(prepared[rest[r]]); });
      stats.evaluations += static_cast<std::uint64_t>(rest.size()) * index.evaluations_per_query();
      for (std::size_t r = 0; r < rest.size(); ++r) {
        if (hits[r].similarity > config.epsilon) {
          result.assignments.push_back(
              {pool[rest[r]], hits[r].id, AssignmentKind::absorbed, hits[r].similarity});
          ++stats.absorbed;
        } else {
          still_remaining.push_back(rest[r]);
        }
      }
    }

    for (auto& p : protos) result.prototypes.push_back(std::move(p));
    result.evaluations += stats.evaluations;
    result.iterations.push_back(stats);
    remaining = std::move(still_remaining);
  }

  std::sort(result.assignments.begin(), result.assignments.end(),
            [](const Assignment& a, const Assignment& b) { return a.name < b.name; });
  return result;
}

nlohmann::json prototypes_to_json(ResourceType type,
                                  std::span<const ClusterPrototype> prototypes) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& p : prototypes) {
    if (p.type != type)
      throw std::invalid_argument("prototypes_to_json: mixed resource types");
    list.push_back({{"id", p.id}, {"members", p.members}});
  }
  return {{"rtype", to_string(type)}, {"prototypes", std::move(list)}};
}

std::vector<ClusterPrototype> prototypes_from_json(const nlohmann::json& j) {
  const auto type_text = j.at("rtype").get<std::string>();
  auto type = parse_resource_type(type_text);
  if (!type) throw ParseError("unknown rtype '" + type_text + "' in prototype set");
  std::vector<ClusterPrototype> out;
  for (const auto& p : j.at("prototypes")) {
    ClusterPrototype proto{p.at("id").get<int>(), *type,
                           p.at("members").get<std::vector<std::string>>()};
    if (proto.members.empty()) throw ParseError("prototype without members");
    out.push_back(std::move(proto));
  }
  return out;
}

}  // namespace vmil
