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
#include "vmil/ingest.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "vmil/error.hpp"
#include "vmil/parallel.hpp"

namespace vmil {

using nlohmann::json;

std::string_view to_string(ResourceType t) {
  switch (t) {
    case ResourceType::file: return "file";
    case ResourceType::registry: return "registry";
    case ResourceType::mutex: return "mutex";
    case ResourceType::network: return "network";
  }
  return "?";
}

std::string_view to_string(Label l) {
  switch (l) {
    case Label::malicious: return "malicious";
    case Label::legitimate: return "legitimate";
    case Label::unknown: return "unknown";
  }
  return "?";
}

std::string_view to_string(Warning w) {
  switch (w) {
    case Warning::dll_not_found: return "dll not found";
    case Warning::incorrect_checksum: return "incorrect executable checksum";
    case Warning::did_not_execute: return "sample did not execute";
  }
  return "?";
}

std::optional<ResourceType> parse_resource_type(std::string_view s) {
  for (auto t : kResourceTypes)
    if (to_string(t) == s) return t;
  return std::nullopt;
}

std::optional<Label> parse_label(std::string_view s) {
  for (auto l : {Label::malicious, Label::legitimate, Label::unknown})
    if (to_string(l) == s) return l;
  return std::nullopt;
}

std::optional<Warning> parse_warning(std::string_view s) {
  for (auto w : kWarnings)
    if (to_string(w) == s) return w;
  return std::nullopt;
}

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  auto first = s.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, out);
  return ec == std::errc() && ptr == first + len;
}

}  // namespace

Timestamp parse_timestamp(std::string_view s) {
  using namespace std::chrono;
  auto fail = [&]() -> Timestamp {
    throw ParseError("invalid timestamp '" + std::string(s) + "'");
  };
  int y = 0, mo = 0, d = 0, hh = 0, mi = 0, ss = 0;
  if (!read_int(s, 0, 4, y) || s.size() < 10 || s[4] != '-' || s[7] != '-' ||
      !read_int(s, 5, 2, mo) || !read_int(s, 8, 2, d))
    return fail();
  std::size_t pos = 10;
  if (pos < s.size()) {
    if (s[pos] != 'T' && s[pos] != ' ') return fail();
    if (!read_int(s, 11, 2, hh) || s.size() < 19 || s[13] != ':' || s[16] != ':' ||
        !read_int(s, 14, 2, mi) || !read_int(s, 17, 2, ss))
      return fail();
    pos = 19;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    }
    std::string_view zone = s.substr(pos);
    if (!zone.empty() && zone != "Z" && zone != "+00:00") return fail();
  }
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                     day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mi > 59 || ss > 60) return fail();
  return sys_days{ymd} + hours{hh} + minutes{mi} + seconds{ss};
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  auto day_point = floor<days>(t);
  year_month_day ymd{day_point};
  hh_mm_ss hms{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

Label label_from_verdicts(const VerdictSummary& v, int threshold) {
  if (v.detections >= threshold) return Label::malicious;
  if (v.detections == 0) return Label::legitimate;
  return Label::unknown;
}

namespace {

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'");
  return *it;
}

const std::string& require_string(const json& j, const char* what) {
  if (!j.is_string()) throw ParseError(std::string(what) + " must be a string");
  return j.get_ref<const std::string&>();
}

SandboxSample sample_from_json(const json& rec, int label_threshold) {
  if (!rec.is_object()) throw ParseError("record is not a JSON object");

  SandboxSample s;
  s.sample_id = require_string(require(rec, "sample_id"), "sample_id");
  if (s.sample_id.empty()) throw ParseError("empty sample_id");
  s.collected_at =
      parse_timestamp(require_string(require(rec, "collected_at"), "collected_at"));

  if (auto it = rec.find("verdicts"); it != rec.end() && !it->is_null()) {
    const auto& v = *it;
    if (!v.is_object() || !v.contains("detections") || !v.contains("engines_total") ||
        !v["detections"].is_number_integer() || !v["engines_total"].is_number_integer())
      throw ParseError("verdicts must be {\"detections\": int, \"engines_total\": int}");
    VerdictSummary vs{v["detections"].get<int>(), v["engines_total"].get<int>()};
    if (vs.engines_total < 1 || vs.detections < 0 || vs.detections > vs.engines_total)
      throw ParseError("verdicts out of range");
    s.verdicts = vs;
    s.label = label_from_verdicts(vs, label_threshold);
  }
  if (auto it = rec.find("label"); it != rec.end() && !it->is_null()) {
    const auto& text = require_string(*it, "label");
    auto l = parse_label(text);
    if (!l) throw ParseError("unknown label '" + text + "'");
    s.label = *l;
  }

  if (auto it = rec.find("resources"); it != rec.end()) {
    if (!it->is_array()) throw ParseError("resources must be an array");
    for (const auto& r : *it) {
      if (!r.is_object()) throw ParseError("resource entry is not an object");
      const auto& type_text = require_string(require(r, "type"), "resource type");
      auto type = parse_resource_type(type_text);
      if (!type) throw ParseError("unknown resource type '" + type_text + "'");
      const auto& name = require_string(require(r, "name"), "resource name");
      if (name.empty()) throw ParseError("empty resource name");
      s.instances.insert({*type, name});
    }
  }

  if (auto it = rec.find("warnings"); it != rec.end()) {
    if (!it->is_array()) throw ParseError("warnings must be an array");
    for (const auto& w : *it) {
      const auto& text = require_string(w, "warning");
      auto warning = parse_warning(text);
      if (!warning) throw ParseError("unknown warning '" + text + "'");
      s.warnings.insert(*warning);
    }
  }
  return s;
}

}  // namespace

SandboxSample parse_report(std::string_view line, std::size_t line_no,
                           int label_threshold) {
  try {
    return sample_from_json(json::parse(line), label_threshold);
  } catch (const json::exception& e) {
    throw ParseError(e.what(), line_no);
  } catch (const ParseError& e) {
    if (line_no == 0 || e.line() != 0) throw;
    throw ParseError(e.what(), line_no);
  }
}

json report_to_json(const SandboxSample& s) {
  json j;
  j["sample_id"] = s.sample_id;
  j["collected_at"] = format_timestamp(s.collected_at);
  j["label"] = to_string(s.label);
  if (s.verdicts)
    j["verdicts"] = {{"detections", s.verdicts->detections},
                     {"engines_total", s.verdicts->engines_total}};
  json resources = json::array();
  for (const auto& inst : s.instances)
    resources.push_back({{"type", to_string(inst.type)}, {"name", inst.name}});
  j["resources"] = std::move(resources);
  json warnings = json::array();
  for (auto w : s.warnings) warnings.push_back(to_string(w));
  j["warnings"] = std::move(warnings);
  return j;
}

std::string serialize_report(const SandboxSample& s) { return report_to_json(s).dump(); }

std::vector<SandboxSample> read_reports(std::istream& in, int label_threshold) {
  struct Line {
    std::size_t number;
    std::string text;
  };
  std::vector<Line> lines;
  std::string text;
  for (std::size_t n = 1; std::getline(in, text); ++n) {
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.push_back({n, std::move(text)});
  }

  std::vector<SandboxSample> samples(lines.size());
  parallel_for(lines.size(), [&](std::size_t i) {
    samples[i] = parse_report(lines[i].text, lines[i].number, label_threshold);
  });

  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!seen.insert(samples[i].sample_id).second)
      throw ParseError("duplicate sample_id '" + samples[i].sample_id + "'",
                       lines[i].number);
  return samples;
}

std::vector<SandboxSample> load_reports(const std::string& path, int label_threshold) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report file '" + path + "'");
  try {
    return read_reports(in, label_threshold);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_reports(std::ostream& out, std::span<const SandboxSample> samples) {
  for (const auto& s : samples) out << serialize_report(s) << '\n';
}

InstanceMap extract_instances(std::span<const SandboxSample> samples) {
  InstanceMap out;
  for (const auto& s : samples)
    for (const auto& inst : s.instances) out[inst.type].insert(inst.name);
  return out;
}

TimeSplit split_by_time(std::span<const SandboxSample> samples, Timestamp cutoff) {
  TimeSplit split;
  for (const auto& s : samples)
    (s.collected_at < cutoff ? split.train : split.test).push_back(s);
  return split;
}

std::vector<SandboxSample> labeled_only(std::span<const SandboxSample> samples) {
  std::vector<SandboxSample> out;
  for (const auto& s : samples)
    if (s.label != Label::unknown) out.push_back(s);
  return out;
}

}  // namespace vmil
