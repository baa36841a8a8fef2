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

#include "vmil/config.hpp"

#include <array>
#include <fstream>
#include <random>
#include <stdexcept>

#include "vmil/error.hpp"

namespace vmil {

void PipelineConfig::set_seed(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::array<std::uint32_t, 6> words{};
  seq.generate(words.begin(), words.end());
  auto join = [&](std::size_t i) {
    return (static_cast<std::uint64_t>(words[2 * i]) << 32) | words[2 * i + 1];
  };
  clustering.seed = join(0);
  forest.seed = join(1);
  optimizer.seed = join(2);
}

void PipelineConfig::validate() const {
  clustering.validate();
  forest.validate();
  optimizer.validate();
  if (projection_threshold && !(*projection_threshold >= 0.0 && *projection_threshold <= 1.0))
    throw std::invalid_argument("projection_threshold must lie in [0, 1]");
  if (label_threshold < 0) throw std::invalid_argument("label_threshold must be >= 0");
}

void to_json(nlohmann::json& j, const PipelineConfig& c) {
  j = {{"similarity", c.similarity},
       {"clustering", c.clustering},
       {"forest", c.forest},
       {"optimizer", c.optimizer},
       {"label_threshold", c.label_threshold}};
  j["projection_threshold"] =
      c.projection_threshold ? nlohmann::json(*c.projection_threshold) : nlohmann::json();
}

void from_json(const nlohmann::json& j, PipelineConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("configuration must be a JSON object");
  if (auto it = j.find("similarity"); it != j.end()) from_json(*it, c.similarity);
  if (auto it = j.find("clustering"); it != j.end()) from_json(*it, c.clustering);
  if (auto it = j.find("forest"); it != j.end()) from_json(*it, c.forest);
  if (auto it = j.find("optimizer"); it != j.end()) from_json(*it, c.optimizer);
  if (auto it = j.find("projection_threshold"); it != j.end())
    c.projection_threshold = it->is_null() ? std::nullopt : std::optional(it->get<double>());
  if (auto it = j.find("label_threshold"); it != j.end()) c.label_threshold = it->get<int>();
  c.validate();
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write to '" + path + "' failed");
}

PipelineConfig load_config(const std::string& path) {
  const auto j = read_json_file(path);
  try {
    return j.get<PipelineConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace vmil
