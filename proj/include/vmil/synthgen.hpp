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

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vmil/ckta.hpp"
#include "vmil/ingest.hpp"

namespace vmil {

// Template text with {hex8}, {hex4}, {int} and {word} placeholders, each
// replaced by a fresh random token.
std::string expand_template(std::string_view tmpl, std::mt19937_64& rng);
// Throws std::invalid_argument on unknown or unterminated placeholders.
void check_template(std::string_view tmpl);

// One family of samples sharing resource-name skeletons.
struct FamilySpec {
  std::string name;
  Label label = Label::malicious;
  std::size_t samples = 100;
  std::map<ResourceType, std::vector<std::string>> templates;
  // Templates drawn per type and sample; unset uses every template.
  std::optional<std::size_t> pick;
  std::map<Warning, double> warning_probability;
  Timestamp start = parse_timestamp("2016-10-24T00:00:00Z");
  Timestamp end = parse_timestamp("2016-12-12T00:00:00Z");

  // Throws std::invalid_argument for an empty name, no templates, bad
  // placeholders, probabilities outside [0, 1] or start after end.
  void validate() const;
};

// {"name", "label", "samples", "templates": {"file": [...], ...}, "pick",
//  "warnings": {"dll not found": p, ...}, "time_range": [start, end]}
void to_json(nlohmann::json& j, const FamilySpec& f);
void from_json(const nlohmann::json& j, FamilySpec& f);

struct CorpusSpec {
  std::vector<FamilySpec> families;
  std::optional<FamilySpec> benign;
};

// {"families": [...], "benign": {...}}
CorpusSpec corpus_spec_from_json(const nlohmann::json& j);
nlohmann::json corpus_spec_to_json(const CorpusSpec& spec);

// Families first, benign last, samples in generation order. Sample ids are
// "<family>-<index>". Throws std::invalid_argument for an empty family list.
std::vector<SandboxSample> generate_corpus(std::span<const FamilySpec> families,
                                           const std::optional<FamilySpec>& benign,
                                           std::uint64_t seed);
std::vector<SandboxSample> generate_corpus(const CorpusSpec& spec, std::uint64_t seed);

// Ready-made malicious families with mutually dissimilar skeletons (up to
// 12) plus a diverse benign population.
CorpusSpec default_corpus_spec(std::size_t families, std::size_t samples_per_family,
                               std::size_t benign_samples);

// `count` distinct names, spread round-robin over the given templates.
std::vector<std::string> generate_names(std::span<const std::string> templates,
                                        std::size_t count, std::uint64_t seed);

// File templates of the default families, one per family.
std::vector<std::string> default_family_file_templates(std::size_t families);

// Labeled paths for weight learning; class i expands templates[i].
std::vector<LabeledPath> generate_labeled_paths(std::span<const std::string> class_templates,
                                                std::size_t per_class, std::uint64_t seed);

// Classes that share depth, general folders and file names and differ only
// in one known folder.
std::vector<std::string> known_folder_class_templates();

}  // namespace vmil
