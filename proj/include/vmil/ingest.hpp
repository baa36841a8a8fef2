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

#include <chrono>
#include <cstddef>
#include <compare>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace vmil {

enum class ResourceType { file, registry, mutex, network };
enum class Label { malicious, legitimate, unknown };
enum class Warning { dll_not_found, incorrect_checksum, did_not_execute };

inline constexpr ResourceType kResourceTypes[] = {
    ResourceType::file, ResourceType::registry, ResourceType::mutex,
    ResourceType::network};
inline constexpr Warning kWarnings[] = {Warning::dll_not_found,
                                        Warning::incorrect_checksum,
                                        Warning::did_not_execute};

std::string_view to_string(ResourceType t);
std::string_view to_string(Label l);
// Wire form used in report files, e.g. "dll not found".
std::string_view to_string(Warning w);
std::optional<ResourceType> parse_resource_type(std::string_view s);
std::optional<Label> parse_label(std::string_view s);
std::optional<Warning> parse_warning(std::string_view s);

using Timestamp = std::chrono::sys_seconds;

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS" with optional fractional
// seconds and a trailing "Z" or "+00:00". Fractions are truncated.
Timestamp parse_timestamp(std::string_view s);
std::string format_timestamp(Timestamp t);

// One resource the binary touched during sandboxing. Names keep their
// original casing; normalization happens in the similarity layer.
struct ResourceInstance {
  ResourceType type;
  std::string name;

  auto operator<=>(const ResourceInstance&) const = default;
};

struct VerdictSummary {
  int detections = 0;
  int engines_total = 1;

  bool operator==(const VerdictSummary&) const = default;
};

struct SandboxSample {
  std::string sample_id;
  Timestamp collected_at{};
  Label label = Label::unknown;
  std::optional<VerdictSummary> verdicts;
  std::set<ResourceInstance> instances;
  std::set<Warning> warnings;

  bool operator==(const SandboxSample&) const = default;
};

// Malicious when at least `threshold` engines flag the binary, legitimate
// when none do, unknown in between.
Label label_from_verdicts(const VerdictSummary& v, int threshold = 4);

// Parses one JSONL record. An explicit "label" wins over "verdicts"; with
// neither present the sample is unknown. line_no only decorates errors.
SandboxSample parse_report(std::string_view line, std::size_t line_no = 0,
                           int label_threshold = 4);
nlohmann::json report_to_json(const SandboxSample& s);
// Single-line JSON; parse_report(serialize_report(s)) == s.
std::string serialize_report(const SandboxSample& s);

// Reads a JSONL stream, skipping blank lines. Duplicate sample ids are a
// data error.
std::vector<SandboxSample> read_reports(std::istream& in, int label_threshold = 4);
std::vector<SandboxSample> load_reports(const std::string& path, int label_threshold = 4);
void write_reports(std::ostream& out, std::span<const SandboxSample> samples);

using InstanceMap = std::map<ResourceType, std::set<std::string>>;

// Per-type union of instance names. Types absent from every sample have no
// entry.
InstanceMap extract_instances(std::span<const SandboxSample> samples);

struct TimeSplit {
  std::vector<SandboxSample> train;  // collected strictly before the cutoff
  std::vector<SandboxSample> test;   // collected at or after the cutoff
};

TimeSplit split_by_time(std::span<const SandboxSample> samples, Timestamp cutoff);

// Samples whose label is malicious or legitimate, in input order.
std::vector<SandboxSample> labeled_only(std::span<const SandboxSample> samples);

}  // namespace vmil
