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

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "vmil/similarity.hpp"

using namespace vmil;

namespace {

const char* kStartup =
    "\\Documents and Settings\\Admin\\Start Menu\\Programs\\Startup\\tii9fwliiv.lnk";
const char* kNotepad =
    "\\Documents and Settings\\Admin\\Start Menu\\Programs\\Accessories\\Notepad.lnk";

KnownFolderList table_two_known() {
  return {"Documents and Settings", "Start Menu", "Programs", "Startup"};
}

std::string categories(const FragmentedPath& p) {
  std::string out;
  for (const auto& f : p.fragments) out += category_letter(f.category);
  return out;
}

std::string random_path(std::mt19937_64& rng, char sep) {
  static const std::vector<std::string> pool = {
      "Windows", "System32", "temp", "Program Files", "Admin", "cache", "a1b2",
      "Startup", "x", "config.dmc", "bin.dmc", "ftp.exe", "Notepad.lnk"};
  std::uniform_int_distribution<std::size_t> depth(1, 6), pick(0, pool.size() - 1);
  std::string out;
  for (std::size_t i = depth(rng); i > 0; --i) {
    out += sep;
    out += pool[pick(rng)];
  }
  return out;
}

}  // namespace

TEST_CASE("tokenize_and_classify labels fragments") {
  auto x = tokenize_and_classify(kStartup, table_two_known(), true);
  CHECK(categories(x) == "KGKKKF");
  CHECK(x.fragments[1].text == "admin");
  CHECK(x.original == kStartup);

  auto temp = tokenize_and_classify("\\Temp\\4ffdd6ab-8020\\config.dmc",
                                    KnownFolderList{"temp"}, true);
  CHECK(categories(temp) == "KGF");

  auto reg = tokenize_and_classify("HKEY_CURRENT_USER\\Software\\Microsoft\\Windows\\Run",
                                   KnownFolderList::default_registry(), true);
  CHECK(categories(reg) == "KKKKF");
}

TEST_CASE("tokenize_and_classify normalizes separators and casing") {
  auto p = tokenize_and_classify("C:\\\\Windows//System32\\ftp.exe",
                                 KnownFolderList::default_file(), false);
  REQUIRE(p.depth() == 4);
  CHECK(p.fragments[1].text == "Windows");
  CHECK(categories(p) == "KKKF");
  CHECK_THROWS_AS(tokenize_and_classify("\\\\//", KnownFolderList{}, true),
                  std::invalid_argument);
  CHECK_THROWS_AS(tokenize_and_classify("", KnownFolderList{}, true), std::invalid_argument);
  // The known-folder check ignores case even when stored text keeps it.
  CHECK(categories(tokenize_and_classify("/TEMP/x", KnownFolderList{"temp"}, false)) == "KF");
}

TEST_CASE("known folder lists are lowercase and separator-free") {
  KnownFolderList k{"Program Files", "TEMP"};
  CHECK(k.contains("program files"));
  CHECK(k.contains("temp"));
  CHECK_FALSE(k.contains("TEMP"));
  CHECK_THROWS_AS(KnownFolderList({"a\\b"}), std::invalid_argument);
  CHECK_THROWS_AS(KnownFolderList({""}), std::invalid_argument);
  const auto registry = KnownFolderList::default_registry();
  for (const auto& n : registry.names())
    CHECK(std::none_of(n.begin(), n.end(), [](unsigned char c) { return std::isupper(c); }));
}

TEST_CASE("diff_features on the worked example") {
  auto known = table_two_known();
  auto f = diff_features(tokenize_and_classify(kStartup, known, true),
                         tokenize_and_classify(kNotepad, known, true));
  CHECK(f[kKG] == 1.0);
  CHECK(f[kFF] == doctest::Approx(0.714286).epsilon(1e-4));
  CHECK(f[kFF] == doctest::Approx(10.0 / 14.0));
  for (auto slot : {kKK, kKF, kKE, kGG, kGF, kGE, kFE}) CHECK(f[slot] == 0.0);
}

TEST_CASE("diff_features pads the shorter path at its end") {
  KnownFolderList known{"windows", "system32"};
  auto f = diff_features(tokenize_and_classify("/Windows/System32/ftp.exe", known, true),
                         tokenize_and_classify("/Windows/ftp.exe", known, true));
  CHECK(f[kKF] == 1.0);
  CHECK(f[kFE] == 1.0);
  for (auto slot : {kKK, kKG, kKE, kGG, kGF, kGE, kFF}) CHECK(f[slot] == 0.0);

  auto same = tokenize_and_classify(kStartup, known, true);
  for (double v : diff_features(same, same)) CHECK(v == 0.0);
}

TEST_CASE("path_similarity reproduces the worked example") {
  auto known = table_two_known();
  auto x = tokenize_and_classify(kStartup, known, true);
  auto y = tokenize_and_classify(kNotepad, known, true);

  std::array<double, kDiffDims> w{};
  w.fill(0.5);
  w[kFF] = 1.0;
  w[kKG] = 2.3;
  CHECK(path_similarity(x, y, WeightVector(w)) == doctest::Approx(0.049).epsilon(0.0005 / 0.049));
  CHECK(path_similarity(x, y, WeightVector::defaults()) ==
        doctest::Approx(std::exp(-(10.0 / 14.0 + 2.3))));

  CHECK(path_similarity(x, x, WeightVector::defaults()) == 1.0);
  CHECK(path_similarity(x, y, WeightVector(std::array<double, kDiffDims>{})) == 1.0);

  std::array<double, kDiffDims> negative{};
  negative[kGG] = -0.1;
  CHECK_THROWS_AS(WeightVector{negative}, std::invalid_argument);
  CHECK(WeightVector::projected(negative)[kGG] == 0.0);
}

TEST_CASE("levenshtein examples") {
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("same", "same") == 0);
  CHECK(levenshtein("tii9fwliiv.lnk", "notepad.lnk") == 10);
  CHECK(levenshtein("", "abc") == 3);
  CHECK(normalized_levenshtein("tii9fwliiv.lnk", "notepad.lnk") ==
        doctest::Approx(0.714286).epsilon(1e-4));
  CHECK(normalized_levenshtein("abc", "abd") == doctest::Approx(1.0 / 3.0));
  CHECK(normalized_levenshtein("", "") == 0.0);
}

TEST_CASE("levenshtein agrees with the DP table and is a metric") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 2000; ++i) {
    auto a = oracle::random_string(rng, 12);
    auto b = oracle::random_string(rng, 12);
    auto c = oracle::random_string(rng, 12);
    auto ab = levenshtein(a, b);
    CHECK(ab == oracle::levenshtein(a, b));
    CHECK(ab == levenshtein(b, a));
    CHECK((ab == 0) == (a == b));
    CHECK(levenshtein(a, c) <= ab + levenshtein(b, c));
  }
}

TEST_CASE("similarity_for_type dispatches per resource type") {
  SimilarityConfig cfg;
  auto mutex = similarity_for_type(ResourceType::mutex, cfg);
  CHECK(mutex("explorer.exeM_1423_", "explorer.exeM_9981_") ==
        doctest::Approx(1.0 - 4.0 / 19.0));
  CHECK(mutex("explorer.exeM_1423_", "explorer.exeM_9981_") == doctest::Approx(0.789).epsilon(1e-3));

  auto reg = similarity_for_type(ResourceType::registry, cfg);
  CHECK(reg("HKEY_LOCAL_MACHINE\\Software\\Run", "HKEY_LOCAL_MACHINE\\Software\\Run") == 1.0);

  auto file = similarity_for_type(ResourceType::file, cfg);
  CHECK(file(kStartup, kNotepad) == doctest::Approx(0.049).epsilon(0.0005 / 0.049));

  auto net = similarity_for_type(ResourceType::network, cfg);
  CHECK(net("http://Evil.example.com:8080/gate.php", "evil.example.com") == 1.0);
  CHECK(net("abc.com", "abd.com") == doctest::Approx(1.0 - 1.0 / 7.0));

  auto custom = Similarity::custom([](std::string_view a, std::string_view b) {
    return a.size() == b.size() ? 1.0 : 0.0;
  });
  CHECK(custom("ab", "cd") == 1.0);
  CHECK(custom("ab", "c") == 0.0);
}

TEST_CASE("hostname_of strips scheme, credentials, port and path") {
  CHECK(hostname_of("https://user:pw@Host.Example.org:443/a/b?q=1") == "host.example.org");
  CHECK(hostname_of("example.com") == "example.com");
  CHECK(hostname_of("http://[::1]:80/x") == "[::1]");
  CHECK(hostname_of("10.0.0.1:53") == "10.0.0.1");
}

TEST_CASE("path similarity properties on random paths") {
  std::mt19937_64 rng(77);
  auto known = KnownFolderList::default_file();
  std::uniform_real_distribution<double> unit(0.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    auto sa = random_path(rng, '\\');
    auto sb = random_path(rng, '/');
    auto a = tokenize_and_classify(sa, known, true);
    auto b = tokenize_and_classify(sb, known, true);
    auto fab = diff_features(a, b);
    auto fba = diff_features(b, a);
    CHECK(fab == fba);

    std::array<double, kDiffDims> raw{};
    for (double& v : raw) v = unit(rng);
    WeightVector w(raw);
    double s = path_similarity(a, b, w);
    CHECK(s > 0.0);
    CHECK(s <= 1.0);
    CHECK(s == path_similarity(b, a, w));
    CHECK(path_similarity(a, a, w) == 1.0);

    // Every level contributes exactly one pair.
    double pairs = fab[kKK] + fab[kKG] + fab[kKF] + fab[kKE] + fab[kGF] + fab[kGE] + fab[kFE];
    std::size_t levels = std::max(a.depth(), b.depth());
    std::size_t same_kind = 0;
    for (std::size_t l = 0; l < std::min(a.depth(), b.depth()); ++l) {
      auto ca = a.fragments[l].category, cb = b.fragments[l].category;
      if (ca != cb) continue;
      if (ca != FragmentCategory::known || a.fragments[l].text == b.fragments[l].text)
        ++same_kind;
    }
    CHECK(pairs + static_cast<double>(same_kind) == static_cast<double>(levels));
    for (double v : fab) CHECK(v >= 0.0);

    // Separator style and casing do not matter.
    std::string flipped = sa, upper = sa;
    std::replace(flipped.begin(), flipped.end(), '\\', '/');
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    CHECK(diff_features(tokenize_and_classify(flipped, known, true), b) == fab);
    CHECK(diff_features(tokenize_and_classify(upper, known, true), b) == fab);
  }
}

TEST_CASE("SimilarityConfig reads partial JSON over defaults") {
  auto j = nlohmann::json::parse(R"({"lowercase": false, "file_known_folders": ["Temp"]})");
  auto cfg = j.get<SimilarityConfig>();
  CHECK_FALSE(cfg.lowercase);
  CHECK(cfg.file_known.contains("temp"));
  CHECK_FALSE(cfg.file_known.contains("windows"));
  CHECK(cfg.registry_weights == WeightVector::defaults());

  nlohmann::json round = cfg;
  CHECK(round.get<SimilarityConfig>() == cfg);

  CHECK_THROWS(nlohmann::json::parse(R"({"file_weights": [1, 2]})").get<SimilarityConfig>());
  CHECK_THROWS(nlohmann::json::parse(R"({"file_weights": [1,1,1,1,1,1,1,1,-1]})")
                   .get<SimilarityConfig>());
}
