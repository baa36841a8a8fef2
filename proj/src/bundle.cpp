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

#include "vmil/bundle.hpp"

#include <array>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "vmil/error.hpp"

namespace vmil {
namespace {

namespace fs = std::filesystem;

constexpr const char* kFormat = "vmil-model";

std::string part(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

nlohmann::json weights_json(const SimilarityConfig& c) {
  return {{"file", c.file_weights.values()}, {"registry", c.registry_weights.values()}};
}

WeightVector weights_from(const nlohmann::json& j, const char* key) {
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != kDiffDims) throw DataError(std::string("weights.json: '") + key +
                                             "' must hold 9 values");
  std::array<double, kDiffDims> a{};
  std::copy(v.begin(), v.end(), a.begin());
  return WeightVector(a);
}

}  // namespace

void save_bundle(const TrainedModel& model, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create bundle directory '" + dir + "': " + ec.message());
  write_json_file(part(dir, "manifest.json"),
                  {{"format", kFormat}, {"version", kBundleVersion}, {"config", model.config}});
  write_json_file(part(dir, "vocabulary.json"), vocabulary_to_json(model.vocabulary));
  write_json_file(part(dir, "weights.json"), weights_json(model.config.similarity));
  write_json_file(part(dir, "forest.json"), forest_to_json(model.forest));
}

TrainedModel load_bundle(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("bundle directory '" + dir + "' does not exist");
  try {
    const auto manifest = read_json_file(part(dir, "manifest.json"));
    if (manifest.value("format", std::string()) != kFormat)
      throw DataError("'" + dir + "' is not a model bundle");
    const int version = manifest.at("version").get<int>();
    if (version != kBundleVersion)
      throw DataError("bundle version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kBundleVersion) + ")");
    TrainedModel model;
    model.config = manifest.at("config").get<PipelineConfig>();

    const auto weights = read_json_file(part(dir, "weights.json"));
    if (weights_from(weights, "file") != model.config.similarity.file_weights ||
        weights_from(weights, "registry") != model.config.similarity.registry_weights)
      throw DataError("weights.json disagrees with the configuration in manifest.json");

    model.vocabulary = vocabulary_from_json(read_json_file(part(dir, "vocabulary.json")));
    model.forest = forest_from_json(read_json_file(part(dir, "forest.json")));
    if (model.forest.dimension() != model.vocabulary.size())
      throw DataError("forest dimension " + std::to_string(model.forest.dimension()) +
                      " does not match vocabulary size " +
                      std::to_string(model.vocabulary.size()));
    return model;
  } catch (const DataError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrupted bundle '" + dir + "': " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError("corrupted bundle '" + dir + "': " + e.what());
  } catch (const std::out_of_range& e) {
    throw DataError("corrupted bundle '" + dir + "': " + e.what());
  }
}

}  // namespace vmil
