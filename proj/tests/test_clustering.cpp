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

#include <atomic>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "vmil/clustering.hpp"
#include "vmil/error.hpp"
#include "vmil/parallel.hpp"
#include "vmil/synthgen.hpp"

using namespace vmil;

namespace {

std::vector<std::string> node_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("n" + std::to_string(i));
  return out;
}

// Similarity read from a weight matrix indexed by the "n<i>" names.
Similarity from_matrix(const oracle::Matrix& adj) {
  return Similarity::custom([adj](std::string_view a, std::string_view b) {
    const auto i = std::stoul(std::string(a.substr(1))), j = std::stoul(std::string(b.substr(1)));
    return i == j ? 1.0 : adj[i][j];
  });
}

SimilarityGraph graph_of(const oracle::Matrix& adj) {
  return build_similarity_graph(node_names(adj.size()), from_matrix(adj), 0.0);
}

oracle::Matrix two_cliques() {
  oracle::Matrix adj(6, std::vector<double>(6, 0.0));
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) adj[3 * c + i][3 * c + j] = 1.0;
  adj[2][3] = adj[3][2] = 0.05;
  return adj;
}

bool contiguous(const Partition& p) {
  std::set<int> ids(p.begin(), p.end());
  return !ids.empty() && *ids.begin() == 0 && *ids.rbegin() == static_cast<int>(ids.size()) - 1;
}

// Family prefix before the first '-' decides similarity: 1 within, 0 across.
Similarity family_similarity() {
  return Similarity::custom([](std::string_view a, std::string_view b) {
    return a.substr(0, a.find('-')) == b.substr(0, b.find('-')) ? 1.0 : 0.0;
  });
}

std::vector<std::string> family_names(std::size_t families, std::size_t per_family) {
  std::vector<std::string> out;
  for (std::size_t f = 0; f < families; ++f)
    for (std::size_t i = 0; i < per_family; ++i)
      out.push_back("fam" + std::to_string(f) + "-" + std::to_string(i));
  return out;
}

}  // namespace

TEST_CASE("build_similarity_graph keeps edges above the floor") {
  const auto one = Similarity::custom([](std::string_view, std::string_view) { return 1.0; });
  const std::vector<std::string> three{"a", "b", "c"};
  auto g = build_similarity_graph(three, one, 0.4);
  CHECK(g.edge_count() == 3);
  for (const auto& adj : g.adjacency) {
    CHECK(adj.size() == 2);
    for (const auto& e : adj) CHECK(e.weight == 1.0);
  }

  const std::vector<std::string> two{"abc", "xyz"};
  g = build_similarity_graph(two, Similarity::edit_distance(), 0.4);
  CHECK(g.node_count() == 2);
  CHECK(g.edge_count() == 0);
  CHECK(louvain_partition(g) == Partition{0, 1});
}

TEST_CASE("build_similarity_graph evaluates every unordered pair once") {
  for (std::size_t n : {1, 2, 7, 40}) {
    auto calls = std::make_shared<std::atomic<std::uint64_t>>(0);
    const auto counting = Similarity::custom([calls](std::string_view a, std::string_view b) {
      ++*calls;
      return a.size() == b.size() ? 0.9 : 0.1;
    });
    const auto names = node_names(n);
    const auto g = build_similarity_graph(names, counting, 0.4);
    CHECK(g.evaluations == n * (n - 1) / 2);
    CHECK(calls->load() == n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& e : g.adjacency[i]) {
        CHECK(e.to != i);
        const auto& back = g.adjacency[e.to];
        CHECK(std::any_of(back.begin(), back.end(), [&](const auto& r) {
          return r.to == i && r.weight == e.weight;
        }));
      }
  }
}

TEST_CASE("louvain separates two cliques joined by a weak edge") {
  const auto adj = two_cliques();
  double best_q = 0.0;
  const auto best = oracle::best_partition(adj, &best_q);
  const auto result = louvain(graph_of(adj));
  CHECK(oracle::same_partition(result.partition, best));
  CHECK(oracle::same_partition(result.partition, {0, 0, 0, 1, 1, 1}));
  CHECK(result.modularity == doctest::Approx(best_q).epsilon(1e-12));
}

TEST_CASE("louvain on trivial graphs") {
  CHECK(louvain_partition(graph_of({{0.0}})) == Partition{0});

  for (std::size_t n = 2; n <= 6; ++n) {
    oracle::Matrix adj(n, std::vector<double>(n, 0.7));
    for (std::size_t i = 0; i < n; ++i) adj[i][i] = 0.0;
    const auto p = louvain_partition(graph_of(adj));
    CHECK(std::set<int>(p.begin(), p.end()).size() == 1);
    double best_q = 0.0;
    oracle::best_partition(adj, &best_q);
    CHECK(oracle::modularity(adj, p) == doctest::Approx(best_q));
  }
}

TEST_CASE("modularity agrees with the definition and louvain stays near the optimum") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> weight(0.0, 1.0);
  std::bernoulli_distribution present(0.5);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 3 + trial % 5;
    oracle::Matrix adj(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (present(rng)) adj[i][j] = adj[j][i] = 0.01 + 0.99 * weight(rng);
    const auto g = graph_of(adj);

    std::uniform_int_distribution<int> label(0, 2);
    Partition random_p(n);
    for (auto& l : random_p) l = label(rng);
    CHECK(modularity(g, random_p) == doctest::Approx(oracle::modularity(adj, random_p)));

    const auto result = louvain(g, {1e-7, static_cast<std::uint64_t>(trial)});
    CHECK(result.partition.size() == n);
    CHECK(contiguous(result.partition));
    CHECK(result.modularity == doctest::Approx(oracle::modularity(adj, result.partition)));
    for (std::size_t l = 1; l < result.level_modularity.size(); ++l)
      CHECK(result.level_modularity[l] >= result.level_modularity[l - 1] - 1e-12);
    double best_q = 0.0;
    oracle::best_partition(adj, &best_q);
    CHECK(result.modularity <= best_q + 1e-12);
    CHECK(result.modularity >= best_q - 0.1);
  }
}

TEST_CASE("louvain isolates disconnected nodes and is reproducible") {
  oracle::Matrix adj = two_cliques();
  for (auto& row : adj) row.push_back(0.0);
  adj.push_back(std::vector<double>(7, 0.0));
  const auto g = graph_of(adj);
  const auto p = louvain_partition(g, 3);
  CHECK(std::count(p.begin(), p.end(), p[6]) == 1);
  CHECK(louvain_partition(g, 3) == p);
}

TEST_CASE("make_prototypes samples up to m members per community") {
  std::vector<std::string> names;
  Partition p;
  for (int i = 0; i < 4; ++i) {
    names.push_back("small" + std::to_string(i));
    p.push_back(0);
  }
  for (int i = 0; i < 100; ++i) {
    names.push_back("large" + std::to_string(i));
    p.push_back(1);
  }
  const auto protos = make_prototypes(p, names, ResourceType::mutex, 10, 5, 7);
  REQUIRE(protos.size() == 2);
  CHECK(protos[0].id == 7);
  CHECK(protos[1].id == 8);
  CHECK(protos[0].members.size() == 4);
  CHECK(protos[1].members.size() == 10);
  CHECK(std::is_sorted(protos[1].members.begin(), protos[1].members.end()));
  for (const auto& m : protos[1].members) CHECK(m.rfind("large", 0) == 0);
  CHECK(protos[0].type == ResourceType::mutex);

  CHECK(make_prototypes(p, names, ResourceType::mutex, 10, 5, 7) == protos);
  bool differs = false;
  for (std::uint64_t seed = 6; seed < 10 && !differs; ++seed)
    differs = make_prototypes(p, names, ResourceType::mutex, 10, seed, 7) != protos;
  CHECK(differs);
  CHECK_THROWS_AS(make_prototypes(p, names, ResourceType::mutex, 0, 5), std::invalid_argument);
}

TEST_CASE("nn_search returns the most similar prototype") {
  const std::map<std::string, double> table = {{"a", 0.9}, {"b", 0.2}, {"c", 0.9}};
  const auto sim = Similarity::custom([table](std::string_view x, std::string_view y) {
    if (x == y) return 1.0;
    return table.at(std::string(x == "q" ? y : x));
  });
  const std::vector<ClusterPrototype> protos = {
      {4, ResourceType::mutex, {"b"}}, {2, ResourceType::mutex, {"a"}},
      {1, ResourceType::mutex, {"b", "c"}}};

  auto hit = nn_search("q", std::span(protos).first(2), sim);
  CHECK(hit.id == 2);
  CHECK(hit.similarity == 0.9);
  hit = nn_search("q", protos, sim);
  CHECK(hit.id == 1);
  CHECK(hit.index == 2);
  hit = nn_search("a", protos, sim);
  CHECK(hit.id == 2);
  CHECK(hit.similarity == 1.0);
  CHECK_THROWS_AS(nn_search("q", std::span<const ClusterPrototype>(), sim),
                  std::invalid_argument);
}

TEST_CASE("approx_cluster with k covering all names is one Louvain pass") {
  const auto templates = default_family_file_templates(4);
  auto names = generate_names(templates, 120, 3);
  const auto sim = Similarity::paths(KnownFolderList::default_file(), WeightVector::defaults(),
                                     true);
  ApproxConfig cfg;
  cfg.k = 500;
  cfg.seed = 12;
  const auto result = approx_cluster(names, ResourceType::file, sim, cfg);

  std::sort(names.begin(), names.end());
  const auto g = build_similarity_graph(names, sim, cfg.epsilon);
  const auto p = louvain_partition(g, cfg.seed);
  const auto expected = make_prototypes(p, names, ResourceType::file, cfg.m, cfg.seed, 0);
  CHECK(result.prototypes == expected);
  CHECK(result.iterations.size() == 1);
  CHECK(result.evaluations == g.evaluations);
  CHECK(oracle::same_partition(result.labels_for(names), p));
}

TEST_CASE("approx_cluster finds one prototype per well-separated family") {
  const auto names = family_names(3, 30);
  ApproxConfig cfg;
  cfg.k = 30;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    cfg.seed = seed;
    const auto result = approx_cluster(names, ResourceType::mutex, family_similarity(), cfg);
    CHECK(result.prototypes.size() == 3);
    // The full-graph oracle on the same names groups by family.
    const auto full = louvain_partition(
        build_similarity_graph(names, family_similarity(), cfg.floor()), seed);
    CHECK(oracle::same_partition(result.labels_for(names), full));
  }
}

TEST_CASE("approx_cluster audit trail") {
  const auto templates = default_family_file_templates(6);
  const auto names = generate_names(templates, 900, 8);
  const auto sim = Similarity::paths(KnownFolderList::default_file(), WeightVector::defaults(),
                                     true);
  ApproxConfig cfg;
  cfg.k = 150;
  cfg.seed = 2;
  const auto result = approx_cluster(names, ResourceType::file, sim, cfg);

  REQUIRE(result.assignments.size() == names.size());
  std::map<int, const ClusterPrototype*> by_id;
  for (const auto& p : result.prototypes) {
    CHECK(by_id.emplace(p.id, &p).second);
    CHECK(!p.members.empty());
    CHECK(p.members.size() <= cfg.m);
  }
  std::set<std::string> seen;
  for (const auto& a : result.assignments) {
    CHECK(seen.insert(a.name).second);
    REQUIRE(by_id.count(a.prototype_id) == 1);
    const auto& proto = *by_id.at(a.prototype_id);
    const bool member = std::binary_search(proto.members.begin(), proto.members.end(), a.name);
    CHECK(member == (a.kind == AssignmentKind::member));
    if (a.kind == AssignmentKind::absorbed) {
      double best = 0.0;
      for (const auto& m : proto.members) best = std::max(best, sim(a.name, m));
      CHECK(best == a.similarity);
      CHECK(a.similarity > cfg.epsilon);
    }
  }

  std::uint64_t bound = 0, total = 0;
  for (const auto& it : result.iterations) {
    const std::uint64_t k = it.subset;
    bound += k * (k - 1) / 2 + it.prototypes * cfg.m * (it.remaining - it.subset);
    total += it.evaluations;
  }
  CHECK(result.evaluations == total);
  CHECK(result.evaluations <= bound);
}

TEST_CASE("approx_cluster is deterministic across seeds and thread counts") {
  const auto names = generate_names(default_family_file_templates(5), 400, 4);
  const auto sim = Similarity::paths(KnownFolderList::default_file(), WeightVector::defaults(),
                                     true);
  ApproxConfig cfg;
  cfg.k = 100;
  cfg.seed = 77;
  set_max_threads(1);
  const auto one = approx_cluster(names, ResourceType::file, sim, cfg);
  set_max_threads(4);
  const auto four = approx_cluster(names, ResourceType::file, sim, cfg);
  set_max_threads(0);
  CHECK(one.prototypes == four.prototypes);
  CHECK(one.evaluations == four.evaluations);
  auto shuffled = names;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(1));
  CHECK(approx_cluster(shuffled, ResourceType::file, sim, cfg).prototypes == one.prototypes);
}

TEST_CASE("approx_cluster gives up after the iteration cap") {
  const auto never = Similarity::custom([](std::string_view, std::string_view) { return 0.0; });
  ApproxConfig cfg;
  cfg.k = 2;
  cfg.max_iterations = 2;
  CHECK_THROWS_AS(approx_cluster(node_names(10), ResourceType::mutex, never, cfg), DataError);
  cfg.max_iterations = 0;
  const auto result = approx_cluster(node_names(10), ResourceType::mutex, never, cfg);
  CHECK(result.prototypes.size() == 10);
  CHECK(result.iterations.size() == 5);
  CHECK_THROWS_AS(approx_cluster({}, ResourceType::mutex, never, cfg), std::invalid_argument);
}

TEST_CASE("ApproxConfig validation and JSON") {
  ApproxConfig cfg;
  CHECK(cfg.floor() == cfg.epsilon);
  cfg.k = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.k = 10;
  cfg.m = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.m = 3;
  cfg.epsilon = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.epsilon = 0.3;
  cfg.edge_floor = 0.1;
  CHECK(cfg.floor() == 0.1);

  const auto back = nlohmann::json(cfg).get<ApproxConfig>();
  CHECK(back.k == 10);
  CHECK(back.m == 3);
  CHECK(back.epsilon == 0.3);
  CHECK(back.edge_floor == 0.1);
  const auto partial = nlohmann::json::parse(R"({"k": 50})").get<ApproxConfig>();
  CHECK(partial.k == 50);
  CHECK(partial.m == 10);
  CHECK(partial.epsilon == 0.4);
}

TEST_CASE("prototype sets round-trip through JSON") {
  const std::vector<ClusterPrototype> protos = {{0, ResourceType::registry, {"HKLM\\a", "HKLM\\b"}},
                                                {1, ResourceType::registry, {"HKCU\\x"}}};
  const auto j = prototypes_to_json(ResourceType::registry, protos);
  CHECK(j.at("rtype") == "registry");
  CHECK(prototypes_from_json(j) == protos);
  CHECK_THROWS_AS(prototypes_to_json(ResourceType::file, protos), std::invalid_argument);
  auto bad = j;
  bad["rtype"] = "disk";
  CHECK_THROWS_AS(prototypes_from_json(bad), ParseError);
}
