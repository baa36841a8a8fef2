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

#include "commands.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "vmil/bundle.hpp"
#include "vmil/ckta.hpp"
#include "vmil/config.hpp"
#include "vmil/error.hpp"
#include "vmil/ingest.hpp"
#include "vmil/parallel.hpp"
#include "vmil/pipeline.hpp"
#include "vmil/synthgen.hpp"

namespace vmil::cli {
namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
};

PipelineConfig resolve_config(const Common& c) {
  PipelineConfig cfg = c.config.empty() ? PipelineConfig{} : load_config(c.config);
  if (c.seed) cfg.set_seed(*c.seed);
  return cfg;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write '" + path + "'");
  return f;
}

// Samples at or after the cutoff; everything when no cutoff is given.
std::vector<SandboxSample> test_part(std::vector<SandboxSample> samples,
                                     const std::string& cutoff) {
  if (cutoff.empty()) return samples;
  return split_by_time(samples, parse_timestamp(cutoff)).test;
}

std::vector<SandboxSample> train_part(std::vector<SandboxSample> samples,
                                      const std::string& cutoff) {
  if (cutoff.empty()) return samples;
  return split_by_time(samples, parse_timestamp(cutoff)).train;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vocabulary-based multiple instance malware classifier"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "vmil 1.0.0");

  Common common;
  app.add_option("--config", common.config, "Pipeline configuration JSON")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", common.seed, "Seed for every randomized stage");
  app.add_option("--threads", common.threads, "Worker thread cap (0: all cores)");

  std::string reports, out_path, model_dir, cutoff, paths, spec_path;
  std::string weight_type = "file";
  std::size_t families = 10, per_family = 200, benign = 1000, per_class = 100;

  auto* train = app.add_subcommand("train", "Cluster instances and fit the forest");
  train->add_option("--reports", reports, "Sandbox reports (JSONL)")->required();
  train->add_option("--out", out_path, "Bundle directory")->required();
  train->add_option("--cutoff", cutoff, "Train only on samples collected before this date");

  auto* pred = app.add_subcommand("predict", "Classify reports with a trained bundle");
  pred->add_option("--reports", reports, "Sandbox reports (JSONL)")->required();
  pred->add_option("--model", model_dir, "Bundle directory")->required();
  pred->add_option("--out", out_path, "Prediction JSONL (default: stdout)");

  auto* eval = app.add_subcommand("evaluate", "Score a bundle on labeled reports");
  eval->add_option("--reports", reports, "Sandbox reports (JSONL)")->required();
  eval->add_option("--model", model_dir, "Bundle directory")->required();
  eval->add_option("--cutoff", cutoff, "Score only samples collected on or after this date");
  eval->add_option("--out", out_path, "Rate report JSON");

  auto* opt = app.add_subcommand("optimize-weights", "Learn path similarity weights");
  opt->add_option("--paths", paths, "Labeled paths (JSONL with path and class)")->required();
  opt->add_option("--out", out_path, "Weight file JSON")->required();
  opt->add_option("--type", weight_type, "Known-folder list to use")
      ->check(CLI::IsMember({"file", "registry"}));

  auto* synth = app.add_subcommand("synth", "Generate a synthetic report corpus");
  synth->add_option("--out", out_path, "Report JSONL")->required();
  synth->add_option("--spec", spec_path, "Corpus spec JSON")->check(CLI::ExistingFile);
  synth->add_option("--families", families, "Built-in malicious families")
      ->check(CLI::Range(1, 12));
  synth->add_option("--samples", per_family, "Samples per malicious family");
  synth->add_option("--benign", benign, "Benign samples");

  auto* synth_paths =
      app.add_subcommand("synth-paths", "Generate labeled paths for weight learning");
  synth_paths->add_option("--out", out_path, "Labeled path JSONL")->required();
  synth_paths->add_option("--per-class", per_class, "Paths per class");

  auto* proj = app.add_subcommand("project", "Write binary feature rows for reports");
  proj->add_option("--reports", reports, "Sandbox reports (JSONL)")->required();
  proj->add_option("--model", model_dir, "Bundle directory")->required();
  proj->add_option("--out", out_path, "Sparse row JSONL (default: stdout)");

  std::vector<const char*> argv{"vmil"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    set_max_threads(common.threads);
    const std::uint64_t seed = common.seed.value_or(0);

    if (*train) {
      const auto cfg = resolve_config(common);
      const auto samples = train_part(load_reports(reports, cfg.label_threshold), cutoff);
      TrainingReport report;
      const auto model = train_model(samples, cfg, &report);
      save_bundle(model, out_path);
      write_json_file((std::filesystem::path(out_path) / "training.json").string(),
                      training_report_to_json(report));
      out << "trained on " << report.samples << " samples (" << report.malicious
          << " malicious, " << report.legitimate << " legitimate), " << report.dimension
          << " features\n";
    } else if (*pred) {
      const auto model = load_bundle(model_dir);
      const auto samples = load_reports(reports, model.config.label_threshold);
      const auto predictions = predict(model, samples);
      std::ofstream file;
      if (!out_path.empty()) file = open_output(out_path);
      std::ostream& sink = out_path.empty() ? out : file;
      for (std::size_t i = 0; i < samples.size(); ++i)
        sink << nlohmann::json{{"sample_id", samples[i].sample_id},
                               {"label", to_string(predictions[i].label)},
                               {"score", predictions[i].score}}
                    .dump()
             << '\n';
    } else if (*eval) {
      const auto model = load_bundle(model_dir);
      const auto samples = test_part(load_reports(reports, model.config.label_threshold), cutoff);
      const auto rates = evaluate(model, samples);
      if (!out_path.empty()) write_json_file(out_path, rates_to_json(rates));
      out << rates_to_text(rates);
    } else if (*opt) {
      const auto cfg = resolve_config(common);
      const auto data = load_labeled_paths(paths);
      const auto& known = weight_type == "file" ? cfg.similarity.file_known
                                                : cfg.similarity.registry_known;
      const auto result = optimize_weights(data, known, cfg.similarity.lowercase, cfg.optimizer);
      write_json_file(out_path, {{"type", weight_type},
                                 {"weights", result.weights.values()},
                                 {"initial_alignment", result.initial_alignment},
                                 {"alignment", result.final_alignment},
                                 {"steps", result.steps}});
      out << "alignment " << result.initial_alignment << " -> " << result.final_alignment
          << " after " << result.steps << " steps\n";
    } else if (*synth) {
      CorpusSpec spec = spec_path.empty()
                            ? default_corpus_spec(families, per_family, benign)
                            : corpus_spec_from_json(read_json_file(spec_path));
      const auto samples = generate_corpus(spec, seed);
      auto file = open_output(out_path);
      write_reports(file, samples);
      out << "wrote " << samples.size() << " reports\n";
    } else if (*synth_paths) {
      const auto templates = known_folder_class_templates();
      const auto items = generate_labeled_paths(templates, per_class, seed);
      auto file = open_output(out_path);
      write_labeled_paths(file, items);
      out << "wrote " << items.size() << " labeled paths\n";
    } else if (*proj) {
      const auto model = load_bundle(model_dir);
      const auto samples = load_reports(reports, model.config.label_threshold);
      const auto rows = project_corpus(samples, model.vocabulary,
                                       make_similarities(model.config.similarity),
                                       ProjectionOptions{model.config.projection_threshold});
      std::ofstream file;
      if (!out_path.empty()) file = open_output(out_path);
      std::ostream& sink = out_path.empty() ? out : file;
      for (std::size_t i = 0; i < samples.size(); ++i)
        sink << sparse_row(samples[i].sample_id, rows[i]).dump() << '\n';
    }
    return kSuccess;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON input: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace vmil::cli
