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

#include "vmil/similarity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace vmil {

char category_letter(FragmentCategory c) {
  switch (c) {
    case FragmentCategory::known: return 'K';
    case FragmentCategory::general: return 'G';
    case FragmentCategory::file: return 'F';
    case FragmentCategory::empty: return 'E';
  }
  return '?';
}

WeightVector::WeightVector() { values_.fill(1.0); }

WeightVector::WeightVector(const std::array<double, kDiffDims>& values) : values_(values) {
  for (double v : values_)
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("path similarity weights must be finite and non-negative");
}

WeightVector WeightVector::defaults() {
  // Same-category slots first: general-folder noise is nearly free, a
  // known/general mismatch is the most expensive.
  std::array<double, kDiffDims> w{};
  w[kKK] = 2.0;
  w[kKG] = 2.3;
  w[kKF] = 1.6;
  w[kKE] = 1.0;
  w[kGG] = 1e-5;
  w[kGF] = 0.36;
  w[kGE] = 0.7;
  w[kFF] = 1.0;
  w[kFE] = 0.9;
  return WeightVector(w);
}

WeightVector WeightVector::projected(const std::array<double, kDiffDims>& values) {
  auto clamped = values;
  for (double& v : clamped) v = std::isfinite(v) ? std::max(v, 0.0) : 0.0;
  return WeightVector(clamped);
}

double WeightVector::dot(const DiffVector& f) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < kDiffDims; ++i) acc += values_[i] * f[i];
  return acc;
}

namespace {

bool is_separator(char c) { return c == '\\' || c == '/'; }

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

KnownFolderList::KnownFolderList(std::span<const std::string> names) {
  for (const auto& n : names) {
    if (n.empty() || std::any_of(n.begin(), n.end(), is_separator))
      throw std::invalid_argument("invalid known folder name '" + n + "'");
    names_.insert(to_lower(n));
  }
}

KnownFolderList::KnownFolderList(std::initializer_list<std::string> names)
    : KnownFolderList(std::span<const std::string>(names.begin(), names.size())) {}

KnownFolderList KnownFolderList::default_file() {
  std::vector<std::string> names = {
      "documents and settings", "start menu", "programs", "startup", "windows",
      "system32", "syswow64", "program files", "program files (x86)", "programdata",
      "temp", "users", "all users", "default user", "default", "public", "appdata",
      "local", "locallow", "roaming", "application data", "local settings",
      "microsoft", "internet explorer", "temporary internet files", "content.ie5",
      "cookies", "history", "desktop", "my documents", "documents", "downloads",
      "favorites", "recent", "sendto", "templates", "prefetch", "fonts", "inf",
      "drivers", "tasks", "config", "winsxs", "common files", "system",
  };
  for (char drive = 'a'; drive <= 'z'; ++drive) names.push_back(std::string{drive, ':'});
  return KnownFolderList(names);
}

KnownFolderList KnownFolderList::default_registry() {
  return KnownFolderList{
      "HKEY_LOCAL_MACHINE", "HKEY_CURRENT_USER", "HKEY_CURRENT_CONFIG",
      "HKEY_CLASSES_ROOT", "HKEY_USERS", "HKEY_PERFORMANCE_DATA",
      "HKLM", "HKCU", "HKCC", "HKCR", "HKU",
      "Software", "Microsoft", "Windows", "Windows NT", "CurrentVersion", "System",
      "CurrentControlSet", "ControlSet001", "Control", "Services", "Policies",
      "Explorer", "Classes", "Wow6432Node",
  };
}

bool KnownFolderList::contains(std::string_view lowercase_name) const {
  return names_.find(lowercase_name) != names_.end();
}

FragmentedPath tokenize_and_classify(std::string_view path, const KnownFolderList& known,
                                     bool lowercase) {
  FragmentedPath out;
  out.original = std::string(path);
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && is_separator(path[i])) ++i;
    std::size_t j = i;
    while (j < path.size() && !is_separator(path[j])) ++j;
    if (j > i) {
      std::string_view piece = path.substr(i, j - i);
      std::string folded = to_lower(piece);
      auto category = known.contains(folded) ? FragmentCategory::known
                                             : FragmentCategory::general;
      out.fragments.push_back(
          {lowercase ? std::move(folded) : std::string(piece), category});
    }
    i = j;
  }
  if (out.fragments.empty())
    throw std::invalid_argument("path '" + out.original + "' has no fragments");
  out.fragments.back().category = FragmentCategory::file;
  return out;
}

namespace {

// Slot for an unordered pair of distinct categories.
DiffSlot mixed_slot(FragmentCategory a, FragmentCategory b) {
  if (b < a) std::swap(a, b);
  using C = FragmentCategory;
  if (a == C::known) {
    if (b == C::general) return kKG;
    if (b == C::file) return kKF;
    return kKE;
  }
  if (a == C::general) return b == C::file ? kGF : kGE;
  return kFE;
}

}  // namespace

DiffVector diff_features(const FragmentedPath& a, const FragmentedPath& b) {
  DiffVector f{};
  const std::size_t depth = std::max(a.depth(), b.depth());
  for (std::size_t level = 0; level < depth; ++level) {
    const bool has_a = level < a.depth();
    const bool has_b = level < b.depth();
    auto ca = has_a ? a.fragments[level].category : FragmentCategory::empty;
    auto cb = has_b ? b.fragments[level].category : FragmentCategory::empty;
    if (ca != cb) {
      f[mixed_slot(ca, cb)] += 1.0;
      continue;
    }
    const auto& ta = a.fragments[level].text;
    const auto& tb = b.fragments[level].text;
    switch (ca) {
      case FragmentCategory::known:
        if (ta != tb) f[kKK] += 1.0;
        break;
      case FragmentCategory::general:
        f[kGG] += normalized_levenshtein(ta, tb);
        break;
      case FragmentCategory::file:
        f[kFF] += normalized_levenshtein(ta, tb);
        break;
      case FragmentCategory::empty:
        break;
    }
  }
  return f;
}

double path_similarity(const FragmentedPath& a, const FragmentedPath& b,
                       const WeightVector& w) {
  return std::exp(-w.dot(diff_features(a, b)));
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  // Common affixes never contribute to the distance.
  while (!a.empty() && !b.empty() && a.front() == b.front()) {
    a.remove_prefix(1);
    b.remove_prefix(1);
  }
  while (!a.empty() && !b.empty() && a.back() == b.back()) {
    a.remove_suffix(1);
    b.remove_suffix(1);
  }
  if (a.size() < b.size()) std::swap(a, b);
  if (b.empty()) return a.size();

  thread_local std::vector<std::size_t> row;
  row.resize(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i + 1;
    for (std::size_t j = 0; j < b.size(); ++j) {
      std::size_t up = row[j + 1];
      std::size_t best = diag + (a[i] == b[j] ? 0 : 1);
      best = std::min(best, up + 1);
      best = std::min(best, row[j] + 1);
      row[j + 1] = best;
      diag = up;
    }
  }
  return row[b.size()];
}

double normalized_levenshtein(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 0.0;
  return static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

std::string hostname_of(std::string_view name) {
  if (auto scheme = name.find("://"); scheme != std::string_view::npos)
    name.remove_prefix(scheme + 3);
  name = name.substr(0, name.find_first_of("/?#"));
  if (auto at = name.rfind('@'); at != std::string_view::npos) name.remove_prefix(at + 1);
  // Keep bracketed IPv6 literals intact.
  if (!name.empty() && name.front() == '[') {
    if (auto close = name.find(']'); close != std::string_view::npos)
      name = name.substr(0, close + 1);
  } else if (auto colon = name.rfind(':'); colon != std::string_view::npos) {
    name = name.substr(0, colon);
  }
  return to_lower(name);
}

void to_json(nlohmann::json& j, const SimilarityConfig& c) {
  j["file_known_folders"] = c.file_known.names();
  j["registry_known_folders"] = c.registry_known.names();
  j["file_weights"] = c.file_weights.values();
  j["registry_weights"] = c.registry_weights.values();
  j["lowercase"] = c.lowercase;
}

namespace {

WeightVector weights_from_json(const nlohmann::json& j, const char* key) {
  if (!j.is_array() || j.size() != kDiffDims)
    throw std::invalid_argument(std::string(key) + " must be an array of 9 numbers");
  std::array<double, kDiffDims> w{};
  for (std::size_t i = 0; i < kDiffDims; ++i) w[i] = j[i].get<double>();
  return WeightVector(w);
}

}  // namespace

void from_json(const nlohmann::json& j, SimilarityConfig& c) {
  if (auto it = j.find("file_known_folders"); it != j.end())
    c.file_known = KnownFolderList(it->get<std::vector<std::string>>());
  if (auto it = j.find("registry_known_folders"); it != j.end())
    c.registry_known = KnownFolderList(it->get<std::vector<std::string>>());
  if (auto it = j.find("file_weights"); it != j.end())
    c.file_weights = weights_from_json(*it, "file_weights");
  if (auto it = j.find("registry_weights"); it != j.end())
    c.registry_weights = weights_from_json(*it, "registry_weights");
  if (auto it = j.find("lowercase"); it != j.end()) c.lowercase = it->get<bool>();
}

Similarity Similarity::paths(KnownFolderList known, WeightVector weights, bool lowercase) {
  Similarity s(Kind::path);
  s.model_ = std::make_shared<const PathModel>(
      PathModel{std::move(known), std::move(weights), lowercase});
  return s;
}

Similarity Similarity::edit_distance() { return Similarity(Kind::edit); }

Similarity Similarity::hostnames() { return Similarity(Kind::host); }

Similarity Similarity::custom(Function fn) {
  Similarity s(Kind::custom);
  s.custom_ = std::move(fn);
  return s;
}

PreparedName Similarity::prepare(std::string_view name) const {
  PreparedName p;
  switch (kind_) {
    case Kind::path:
      p.path = tokenize_and_classify(name, model_->known, model_->lowercase);
      p.text = std::string(name);
      break;
    case Kind::host:
      p.text = hostname_of(name);
      break;
    case Kind::edit:
    case Kind::custom:
      p.text = std::string(name);
      break;
  }
  return p;
}

std::vector<PreparedName> Similarity::prepare_all(std::span<const std::string> names) const {
  std::vector<PreparedName> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(prepare(n));
  return out;
}

double Similarity::operator()(const PreparedName& a, const PreparedName& b) const {
  switch (kind_) {
    case Kind::path:
      return path_similarity(a.path, b.path, model_->weights);
    case Kind::edit:
    case Kind::host:
      return 1.0 - normalized_levenshtein(a.text, b.text);
    case Kind::custom:
      return custom_(a.text, b.text);
  }
  return 0.0;
}

double Similarity::operator()(std::string_view a, std::string_view b) const {
  return (*this)(prepare(a), prepare(b));
}

Similarity similarity_for_type(ResourceType type, const SimilarityConfig& config) {
  switch (type) {
    case ResourceType::file:
      return Similarity::paths(config.file_known, config.file_weights, config.lowercase);
    case ResourceType::registry:
      return Similarity::paths(config.registry_known, config.registry_weights,
                               config.lowercase);
    case ResourceType::mutex:
      return Similarity::edit_distance();
    case ResourceType::network:
      return Similarity::hostnames();
  }
  return Similarity::edit_distance();
}

}  // namespace vmil
