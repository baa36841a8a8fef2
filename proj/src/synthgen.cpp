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

#include "vmil/synthgen.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace vmil {
namespace {

const std::vector<std::string>& words() {
  static const std::vector<std::string> list = {
      "alpha",  "amber",  "atlas",  "beacon", "birch",  "cobalt", "comet",  "coral",
      "delta",  "ember",  "falcon", "fern",   "garnet", "harbor", "indigo", "jasper",
      "kestrel", "lagoon", "maple",  "meadow", "nimbus", "onyx",   "orchid", "pepper",
      "quartz", "raven",  "saffron", "sierra", "tango",  "thistle", "umber", "velvet",
      "willow", "xenon",  "yarrow", "zephyr", "acorn",  "basil",  "cedar",  "dune",
      "echo",   "flint",  "glade",  "hazel",  "iris",   "juniper", "koala", "lotus",
      "mango",  "nectar", "olive",  "pine",   "quill",  "rust",   "sage",   "tulip",
  };
  return list;
}

enum class Token { hex8, hex4, integer, word };

std::optional<Token> token_for(std::string_view name) {
  if (name == "hex8") return Token::hex8;
  if (name == "hex4") return Token::hex4;
  if (name == "int") return Token::integer;
  if (name == "word") return Token::word;
  return std::nullopt;
}

std::string random_hex(std::size_t digits, std::mt19937_64& rng) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::uniform_int_distribution<int> d(0, 15);
  std::string out(digits, '0');
  for (char& c : out) c = kHex[d(rng)];
  return out;
}

// Calls emit(literal) and emit_token(token) in template order.
template <typename Literal, typename Placeholder>
void walk_template(std::string_view tmpl, Literal&& literal, Placeholder&& placeholder) {
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const auto open = tmpl.find('{', i);
    if (open == std::string_view::npos) {
      literal(tmpl.substr(i));
      return;
    }
    literal(tmpl.substr(i, open - i));
    const auto close = tmpl.find('}', open);
    if (close == std::string_view::npos)
      throw std::invalid_argument("unterminated placeholder in template '" + std::string(tmpl) +
                                  "'");
    const auto name = tmpl.substr(open + 1, close - open - 1);
    const auto token = token_for(name);
    if (!token)
      throw std::invalid_argument("unknown placeholder {" + std::string(name) + "}");
    placeholder(*token);
    i = close + 1;
  }
}

}  // namespace

std::string expand_template(std::string_view tmpl, std::mt19937_64& rng) {
  std::string out;
  walk_template(
      tmpl, [&](std::string_view lit) { out += lit; },
      [&](Token t) {
        switch (t) {
          case Token::hex8: out += random_hex(8, rng); break;
          case Token::hex4: out += random_hex(4, rng); break;
          case Token::integer:
            out += std::to_string(std::uniform_int_distribution<int>(100, 99999)(rng));
            break;
          case Token::word: {
            const auto& w = words();
            out += w[std::uniform_int_distribution<std::size_t>(0, w.size() - 1)(rng)];
            break;
          }
        }
      });
  return out;
}

void check_template(std::string_view tmpl) {
  walk_template(tmpl, [](std::string_view) {}, [](Token) {});
}

void FamilySpec::validate() const {
  if (name.empty()) throw std::invalid_argument("family spec without a name");
  std::size_t total = 0;
  for (const auto& [type, list] : templates) {
    for (const auto& t : list) {
      if (t.empty()) throw std::invalid_argument("empty template in family " + name);
      check_template(t);
    }
    total += list.size();
  }
  if (total == 0) throw std::invalid_argument("family " + name + " has no templates");
  if (pick && *pick == 0) throw std::invalid_argument("family " + name + ": pick must be >= 1");
  for (const auto& [w, p] : warning_probability)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("family " + name + ": warning probability outside [0, 1]");
  if (end < start) throw std::invalid_argument("family " + name + ": time range is reversed");
}

void to_json(nlohmann::json& j, const FamilySpec& f) {
  nlohmann::json templates = nlohmann::json::object();
  for (const auto& [type, list] : f.templates) templates[std::string(to_string(type))] = list;
  nlohmann::json warnings = nlohmann::json::object();
  for (const auto& [w, p] : f.warning_probability) warnings[std::string(to_string(w))] = p;
  j = {{"name", f.name},
       {"label", to_string(f.label)},
       {"samples", f.samples},
       {"templates", templates},
       {"warnings", warnings},
       {"time_range", {format_timestamp(f.start), format_timestamp(f.end)}}};
  if (f.pick) j["pick"] = *f.pick;
}

void from_json(const nlohmann::json& j, FamilySpec& f) {
  f.name = j.at("name").get<std::string>();
  if (auto it = j.find("label"); it != j.end()) {
    auto l = parse_label(it->get<std::string>());
    if (!l) throw std::invalid_argument("unknown label in family " + f.name);
    f.label = *l;
  }
  if (auto it = j.find("samples"); it != j.end()) f.samples = it->get<std::size_t>();
  f.templates.clear();
  for (const auto& [key, list] : j.at("templates").items()) {
    auto type = parse_resource_type(key);
    if (!type) throw std::invalid_argument("unknown resource type '" + key + "' in templates");
    f.templates[*type] = list.get<std::vector<std::string>>();
  }
  if (auto it = j.find("pick"); it != j.end() && !it->is_null()) f.pick = it->get<std::size_t>();
  f.warning_probability.clear();
  if (auto it = j.find("warnings"); it != j.end())
    for (const auto& [key, p] : it->items()) {
      auto w = parse_warning(key);
      if (!w) throw std::invalid_argument("unknown warning '" + key + "'");
      f.warning_probability[*w] = p.get<double>();
    }
  if (auto it = j.find("time_range"); it != j.end()) {
    if (!it->is_array() || it->size() != 2)
      throw std::invalid_argument("time_range must be [start, end]");
    f.start = parse_timestamp((*it)[0].get<std::string>());
    f.end = parse_timestamp((*it)[1].get<std::string>());
  }
  f.validate();
}

CorpusSpec corpus_spec_from_json(const nlohmann::json& j) {
  CorpusSpec spec;
  spec.families = j.at("families").get<std::vector<FamilySpec>>();
  if (auto it = j.find("benign"); it != j.end() && !it->is_null()) {
    spec.benign = it->get<FamilySpec>();
  }
  return spec;
}

nlohmann::json corpus_spec_to_json(const CorpusSpec& spec) {
  nlohmann::json j = {{"families", spec.families}};
  j["benign"] = spec.benign ? nlohmann::json(*spec.benign) : nlohmann::json();
  return j;
}

namespace {

void generate_family(const FamilySpec& f, std::mt19937_64& rng,
                     std::vector<SandboxSample>& out) {
  f.validate();
  const auto span_seconds = (f.end - f.start).count();
  std::uniform_int_distribution<long long> offset(0, span_seconds);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const int width = std::max<int>(5, static_cast<int>(std::to_string(f.samples).size()));
  for (std::size_t i = 0; i < f.samples; ++i) {
    SandboxSample s;
    char id[32];
    std::snprintf(id, sizeof id, "%0*zu", width, i);
    s.sample_id = f.name + "-" + id;
    s.collected_at = f.start + std::chrono::seconds(offset(rng));
    s.label = f.label;
    for (const auto& [type, list] : f.templates) {
      std::vector<std::string> chosen;
      if (f.pick && *f.pick < list.size())
        std::sample(list.begin(), list.end(), std::back_inserter(chosen), *f.pick, rng);
      else
        chosen = list;
      for (const auto& t : chosen) s.instances.insert({type, expand_template(t, rng)});
    }
    for (const auto& [w, p] : f.warning_probability)
      if (coin(rng) < p) s.warnings.insert(w);
    out.push_back(std::move(s));
  }
}

}  // namespace

std::vector<SandboxSample> generate_corpus(std::span<const FamilySpec> families,
                                           const std::optional<FamilySpec>& benign,
                                           std::uint64_t seed) {
  if (families.empty()) throw std::invalid_argument("generate_corpus: no families");
  std::mt19937_64 rng(seed);
  std::vector<SandboxSample> out;
  for (const auto& f : families) generate_family(f, rng, out);
  if (benign) generate_family(*benign, rng, out);
  return out;
}

std::vector<SandboxSample> generate_corpus(const CorpusSpec& spec, std::uint64_t seed) {
  return generate_corpus(spec.families, spec.benign, seed);
}

namespace {

struct FamilySkeleton {
  const char* name;
  std::vector<std::string> files;
  std::vector<std::string> registry;
  std::vector<std::string> mutexes;
  std::vector<std::string> hosts;
};

// Every family starts its file paths from a different known-folder chain
// and uses its own mutex and host vocabulary.
const std::vector<FamilySkeleton>& skeletons() {
  static const std::vector<FamilySkeleton> list = {
      {"dmcloader",
       {"\\Temp\\{hex8}-{hex4}\\config.dmc", "\\Temp\\{hex8}-{hex4}\\bin.dmc"},
       {"HKEY_CURRENT_USER\\Software\\{hex8}\\dmcfg"},
       {"Global\\{hex8}-dmcx"},
       {"http://cfg{int}.dmc-loader.net/gate.php"}},
      {"sality",
       {"\\Windows\\System32\\drivers\\{hex8}.sys", "\\Windows\\System32\\drivers\\wmi{hex4}.dat"},
       {"HKEY_LOCAL_MACHINE\\System\\CurrentControlSet\\Services\\{hex8}\\ImagePath"},
       {"explorer.exeM_{int}_", "svchost.exeM_{int}_"},
       {"http://www.sality-p2p{int}.info/image.gif"}},
      {"startuplnk",
       {"\\Documents and Settings\\{word}\\Start Menu\\Programs\\Startup\\{hex8}.lnk"},
       {"HKEY_CURRENT_USER\\Software\\Microsoft\\Windows\\CurrentVersion\\Explorer\\{hex8}\\lnkstate"},
       {"LNKMTX_{hex4}{hex4}"},
       {"lnk{int}.startup-drop.org"}},
      {"roamer",
       {"\\Users\\{word}\\AppData\\Roaming\\{hex8}\\winupd32.exe",
        "\\Users\\{word}\\AppData\\Roaming\\{hex8}\\winupd32.cfg"},
       {"HKEY_CURRENT_USER\\Software\\Microsoft\\Windows\\CurrentVersion\\Run\\winupd32"},
       {"RoamerSingleton{int}"},
       {"https://upd{int}.roamer-sync.com/check"}},
      {"fontdrop",
       {"\\Windows\\Fonts\\{hex8}{hex4}.fon"},
       {"HKEY_LOCAL_MACHINE\\Software\\Microsoft\\Windows NT\\CurrentVersion\\Fonts\\{hex8}\\Glyph"},
       {"fnt_{hex8}_lock"},
       {"fonts{int}.glyph-cache.biz"}},
      {"taskjob",
       {"\\Windows\\Tasks\\{hex8}.job", "\\ProgramData\\{hex8}\\taskhost.bin"},
       {"HKEY_LOCAL_MACHINE\\Software\\Microsoft\\Windows NT\\CurrentVersion\\Schedule\\{hex8}\\Job"},
       {"TaskJobMutex__{int}"},
       {"job{int}.task-relay.ru"}},
      {"prefetcher",
       {"\\Windows\\Prefetch\\{hex8}-{hex8}.pf", "\\Windows\\Prefetch\\Layout{hex4}.ini"},
       {"HKEY_USERS\\{hex8}\\Software\\PrefetchCtl"},
       {"PF::{hex4}::{hex4}"},
       {"pf{int}.layout-stats.net"}},
      {"ieccache",
       {"\\Users\\{word}\\AppData\\Local\\Microsoft\\Windows\\Temporary Internet Files\\Content.IE5\\{hex8}\\ad{int}.js"},
       {"HKEY_CURRENT_USER\\Software\\Microsoft\\Internet Explorer\\{hex8}\\AdCache"},
       {"IEAdCache{hex8}"},
       {"ads{int}.banner-rotator.com"}},
      {"wowinject",
       {"\\Windows\\SysWOW64\\{hex8}\\inject64.dll", "\\Windows\\SysWOW64\\{hex8}\\inject64.ini"},
       {"HKEY_LOCAL_MACHINE\\Software\\Wow6432Node\\{hex8}\\Inject"},
       {"wow64inj-{hex4}-{hex4}"},
       {"inj{int}.wow-gate.info"}},
      {"pfx86",
       {"\\Program Files (x86)\\Common Files\\{hex8}\\msupd.exe"},
       {"HKEY_CLASSES_ROOT\\CLSID\\{hex8}-{hex4}\\InprocServer32"},
       {"MsUpdCommon_{int}"},
       {"upd{int}.common-files.net"}},
      {"recentdoc",
       {"\\Users\\{word}\\Recent\\{hex8}.doc.lnk"},
       {"HKEY_CURRENT_CONFIG\\Software\\RecentDocs{hex4}\\MRU"},
       {"RcntDocLock{hex4}"},
       {"docs{int}.recent-share.org"}},
      {"publicdrop",
       {"\\Users\\Public\\Downloads\\{hex8}\\setup_{int}.msi"},
       {"HKEY_LOCAL_MACHINE\\Software\\Classes\\{hex8}\\shell\\open"},
       {"PublicDropper:{int}"},
       {"dl{int}.public-mirror.cc"}},
  };
  return list;
}

FamilySpec benign_family(std::size_t samples) {
  FamilySpec b;
  b.name = "benign";
  b.label = Label::legitimate;
  b.samples = samples;
  b.pick = 3;
  b.templates[ResourceType::file] = {
      "\\Program Files\\{word}\\{word}.exe",
      "\\Program Files\\{word}\\{word}.dll",
      "\\Program Files\\{word}\\{word}\\{word}.xml",
      "\\Users\\{word}\\Documents\\{word}.docx",
      "\\Users\\{word}\\Desktop\\{word}.txt",
      "\\Users\\{word}\\AppData\\Local\\{word}\\settings.ini",
      "\\Windows\\System32\\{word}.dll",
      "\\Windows\\System32\\en-US\\{word}.dll.mui",
      "\\ProgramData\\{word}\\{word}.log",
      "\\Users\\{word}\\Downloads\\{word}_installer.exe",
  };
  b.templates[ResourceType::registry] = {
      "HKEY_CURRENT_USER\\Software\\{word}\\Settings",
      "HKEY_LOCAL_MACHINE\\Software\\{word}\\InstallPath",
      "HKEY_CURRENT_USER\\Software\\Microsoft\\Office\\{word}\\MRU",
      "HKEY_LOCAL_MACHINE\\System\\CurrentControlSet\\Control\\{word}",
  };
  b.templates[ResourceType::mutex] = {
      "Local\\{word}SingleInstance",
      "{word}_{word}_instance",
      "Global\\{word}Updater",
  };
  b.templates[ResourceType::network] = {
      "https://www.{word}.com/",
      "http://update.{word}.org/version.xml",
      "https://cdn.{word}.net/static/app.js",
  };
  b.warning_probability = {{Warning::dll_not_found, 0.05},
                           {Warning::incorrect_checksum, 0.01},
                           {Warning::did_not_execute, 0.02}};
  return b;
}

}  // namespace

CorpusSpec default_corpus_spec(std::size_t families, std::size_t samples_per_family,
                               std::size_t benign_samples) {
  const auto& sk = skeletons();
  if (families == 0 || families > sk.size())
    throw std::invalid_argument("default_corpus_spec: between 1 and " +
                                std::to_string(sk.size()) + " families");
  CorpusSpec spec;
  for (std::size_t i = 0; i < families; ++i) {
    FamilySpec f;
    f.name = sk[i].name;
    f.label = Label::malicious;
    f.samples = samples_per_family;
    f.templates[ResourceType::file] = sk[i].files;
    f.templates[ResourceType::registry] = sk[i].registry;
    f.templates[ResourceType::mutex] = sk[i].mutexes;
    f.templates[ResourceType::network] = sk[i].hosts;
    f.warning_probability = {{Warning::dll_not_found, 0.15 + 0.05 * static_cast<double>(i % 3)},
                             {Warning::incorrect_checksum, 0.05},
                             {Warning::did_not_execute, 0.03}};
    spec.families.push_back(std::move(f));
  }
  if (benign_samples > 0) spec.benign = benign_family(benign_samples);
  return spec;
}

std::vector<std::string> generate_names(std::span<const std::string> templates,
                                        std::size_t count, std::uint64_t seed) {
  if (templates.empty()) throw std::invalid_argument("generate_names: no templates");
  std::mt19937_64 rng(seed);
  std::set<std::string> seen;
  std::vector<std::string> out;
  out.reserve(count);
  std::size_t attempts = 0;
  while (out.size() < count) {
    const auto& t = templates[out.size() % templates.size()];
    auto name = expand_template(t, rng);
    if (seen.insert(name).second) {
      out.push_back(std::move(name));
      attempts = 0;
    } else if (++attempts > 1000) {
      throw std::invalid_argument("generate_names: template '" + t +
                                  "' cannot produce enough distinct names");
    }
  }
  return out;
}

std::vector<std::string> default_family_file_templates(std::size_t families) {
  const auto& sk = skeletons();
  if (families == 0 || families > sk.size())
    throw std::invalid_argument("default_family_file_templates: between 1 and " +
                                std::to_string(sk.size()) + " families");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < families; ++i) out.push_back(sk[i].files.front());
  return out;
}

std::vector<LabeledPath> generate_labeled_paths(std::span<const std::string> class_templates,
                                                std::size_t per_class, std::uint64_t seed) {
  if (class_templates.size() < 2)
    throw std::invalid_argument("generate_labeled_paths: need at least two classes");
  std::mt19937_64 rng(seed);
  std::vector<LabeledPath> out;
  for (std::size_t i = 0; i < per_class; ++i)
    for (std::size_t c = 0; c < class_templates.size(); ++c)
      out.push_back({expand_template(class_templates[c], rng), static_cast<int>(c)});
  return out;
}

std::vector<std::string> known_folder_class_templates() {
  return {
      "\\Windows\\System32\\{hex8}\\{word}{int}.dat",
      "\\Windows\\SysWOW64\\{hex8}\\{word}{int}.dat",
      "\\Windows\\Fonts\\{hex8}\\{word}{int}.dat",
      "\\Windows\\Tasks\\{hex8}\\{word}{int}.dat",
  };
}

}  // namespace vmil
