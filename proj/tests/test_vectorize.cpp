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

#include <random>

#include "doctest.h"
#include "vmil/error.hpp"
#include "vmil/synthgen.hpp"
#include "vmil/vectorize.hpp"

using namespace vmil;

namespace {

SandboxSample sample(std::string id, std::vector<ResourceInstance> instances,
                     std::set<Warning> warnings = {}) {
  SandboxSample s;
  s.sample_id = std::move(id);
  s.instances.insert(instances.begin(), instances.end());
  s.warnings = std::move(warnings);
  return s;
}

ResourceInstance file(std::string name) { return {ResourceType::file, std::move(name)}; }
ResourceInstance mutex(std::string name) { return {ResourceType::mutex, std::move(name)}; }

PrototypeMap small_prototypes() {
  PrototypeMap m;
  m[ResourceType::mutex] = {{0, ResourceType::mutex, {"explorer.exeM_100_"}}};
  m[ResourceType::file] = {{1, ResourceType::file, {"\\Windows\\System32\\ftp.exe"}},
                           {0, ResourceType::file, {"\\Temp\\abc\\config.dmc"}}};
  return m;
}

std::size_t ones(const FeatureVector& x) { return std::count(x.begin(), x.end(), 1); }

}  // namespace

TEST_CASE("build_vocabulary orders prototypes by type and id with warnings last") {
  const auto v = build_vocabulary(small_prototypes());
  REQUIRE(v.size() == 6);
  const auto& f = v.features();
  CHECK(f[0] == Feature(PrototypeFeature{ResourceType::file, 0}));
  CHECK(f[1] == Feature(PrototypeFeature{ResourceType::file, 1}));
  CHECK(f[2] == Feature(PrototypeFeature{ResourceType::mutex, 0}));
  CHECK(f[3] == Feature(Warning::dll_not_found));
  CHECK(f[4] == Feature(Warning::incorrect_checksum));
  CHECK(f[5] == Feature(Warning::did_not_execute));
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v.position(f[i]) == i);
  CHECK_THROWS_AS(v.position(PrototypeFeature{ResourceType::network, 0}), std::out_of_range);
  CHECK(build_vocabulary(small_prototypes()) == v);

  CHECK_THROWS_AS(build_vocabulary({}), std::invalid_argument);
  PrototypeMap empty_lists;
  empty_lists[ResourceType::file] = {};
  CHECK_THROWS_AS(build_vocabulary(empty_lists), std::invalid_argument);
  PrototypeMap mislabeled;
  mislabeled[ResourceType::file] = {{0, ResourceType::mutex, {"x"}}};
  CHECK_THROWS_AS(build_vocabulary(mislabeled), std::invalid_argument);
}

TEST_CASE("vocabulary JSON round trip") {
  const auto v = build_vocabulary(small_prototypes());
  const auto j = vocabulary_to_json(v);
  CHECK(vocabulary_from_json(j) == v);
  CHECK(vocabulary_from_json(nlohmann::json::parse(j.dump())) == v);
  auto swapped = j;
  std::swap(swapped["features"][0], swapped["features"][1]);
  CHECK_THROWS_AS(vocabulary_from_json(swapped), ParseError);
}

TEST_CASE("projection examples") {
  const auto v = build_vocabulary(small_prototypes());
  const auto sims = make_similarities(SimilarityConfig{});

  const auto zero = project_sample(sample("z", {}), v, sims);
  CHECK(zero.size() == v.size());
  CHECK(ones(zero) == 0);

  const auto warn = project_sample(sample("w", {}, {Warning::dll_not_found}), v, sims);
  CHECK(ones(warn) == 1);
  CHECK(warn[v.position(Warning::dll_not_found)] == 1);

  const auto s = sample("s", {file("\\Temp\\zz9\\config.dmc"), mutex("explorer.exeM_2231_")},
                        {Warning::did_not_execute});
  const auto x = project_sample(s, v, sims);
  CHECK(x[v.position(PrototypeFeature{ResourceType::file, 0})] == 1);
  CHECK(x[v.position(PrototypeFeature{ResourceType::file, 1})] == 0);
  CHECK(x[v.position(PrototypeFeature{ResourceType::mutex, 0})] == 1);
  CHECK(x[v.position(Warning::did_not_execute)] == 1);
  CHECK(ones(x) == 3);
}

TEST_CASE("instances of a type without prototypes are skipped and counted") {
  const auto v = build_vocabulary(small_prototypes());
  const Projector p(v, make_similarities(SimilarityConfig{}));
  ProjectionStats stats;
  const auto x = p.project(sample("n", {{ResourceType::network, "http://a.com"},
                                         {ResourceType::registry, "HKLM\\Software\\x"}}),
                           &stats);
  CHECK(ones(x) == 0);
  CHECK(stats.skipped == 2);
}

TEST_CASE("the optional threshold rejects distant instances") {
  const auto v = build_vocabulary(small_prototypes());
  const auto sims = make_similarities(SimilarityConfig{});
  const auto far = sample("f", {file("\\Users\\bob\\Desktop\\holiday.jpg")});
  CHECK(ones(project_sample(far, v, sims)) == 1);
  const Projector strict(v, sims, ProjectionOptions{0.4});
  ProjectionStats stats;
  CHECK(ones(strict.project(far, &stats)) == 0);
  CHECK(stats.below_threshold == 1);
}

TEST_CASE("the two example binaries project to identical file bits") {
  // Raw file names of two binaries from one family: randomized folder,
  // fixed basenames, plus a system utility each.
  const auto b1 = sample("binary-1", {file("\\Temp\\4ffdd6ab-8020\\config.dmc"),
                                      file("\\Temp\\4ffdd6ab-8020\\bin.dmc"),
                                      file("\\Windows\\System32\\ftp.exe")});
  const auto b2 = sample("binary-2", {file("\\Temp\\ed8a9718-c7a0\\config.dmc"),
                                      file("\\Temp\\ed8a9718-c7a0\\bin.dmc"),
                                      file("\\Windows\\System32\\netsh.exe")});
  const std::vector<SandboxSample> corpus{b1, b2};
  const auto names = extract_instances(corpus).at(ResourceType::file);
  const std::vector<std::string> list(names.begin(), names.end());
  REQUIRE(list.size() == 6);

  SimilarityConfig cfg;
  const auto sims = make_similarities(cfg);
  ApproxConfig approx;
  const auto clusters = approx_cluster(list, ResourceType::file, sims.at(ResourceType::file), approx);
  CHECK(clusters.prototypes.size() == 2);
  const auto labels = clusters.labels_for(list);
  // Sorted names: two bin.dmc, two config.dmc, ftp.exe, netsh.exe.
  CHECK(labels[0] == labels[1]);
  CHECK(labels[0] == labels[2]);
  CHECK(labels[0] == labels[3]);
  CHECK(labels[4] == labels[5]);
  CHECK(labels[0] != labels[4]);

  PrototypeMap protos;
  protos[ResourceType::file] = clusters.prototypes;
  const auto v = build_vocabulary(protos);
  const auto rows = project_corpus(corpus, v, sims);
  CHECK(rows[0] == rows[1]);
  CHECK(ones(rows[0]) == 2);
}

TEST_CASE("corpus projection matches per-sample projection") {
  const auto spec = default_corpus_spec(3, 10, 10);
  const auto corpus = generate_corpus(spec, 5);
  const auto instances = extract_instances(corpus);
  const auto sims = make_similarities(SimilarityConfig{});
  PrototypeMap protos;
  for (const auto& [type, names] : instances) {
    const std::vector<std::string> list(names.begin(), names.end());
    protos[type] = approx_cluster(list, type, sims.at(type), ApproxConfig{}).prototypes;
  }
  const auto v = build_vocabulary(protos);

  CHECK(project_corpus({}, v, sims).empty());
  const auto rows = project_corpus(corpus, v, sims);
  REQUIRE(rows.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(rows[i].size() == v.size());
    CHECK(rows[i] == project_sample(corpus[i], v, sims));
    CHECK(dense_row(sparse_row(corpus[i].sample_id, rows[i]), v.size()) == rows[i]);
  }
  const std::vector<SandboxSample> twins{corpus[0], corpus[0]};
  const auto twin_rows = project_corpus(twins, v, sims);
  CHECK(twin_rows[0] == twin_rows[1]);

  // Adding an instance never clears a bit.
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto grown = corpus[i];
    const auto& donor = corpus[(i * 7 + 3) % corpus.size()];
    if (donor.instances.empty()) continue;
    grown.instances.insert(*donor.instances.begin());
    const auto x = project_sample(grown, v, sims);
    for (std::size_t b = 0; b < x.size(); ++b) CHECK(x[b] >= rows[i][b]);
  }
}

TEST_CASE("sparse rows") {
  const FeatureVector x{0, 1, 0, 1, 1};
  const auto j = sparse_row("abc", x);
  CHECK(j.dump() == R"({"bits":[1,3,4],"sample_id":"abc"})");
  CHECK(dense_row(j, 5) == x);
  CHECK_THROWS_AS(dense_row(j, 4), ParseError);
}
