// Copyright 2026 The Histoseg Authors. All rights reserved.
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

#include "histoseg/experiment.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "histoseg/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace histoseg {

namespace {

[[noreturn]] void field_error(const std::string& origin,
                              const std::string& field,
                              const std::string& what) {
  throw std::invalid_argument(origin + ": field '" + field + "': " + what);
}

// field may be a dotted path like "schedule.epochs"; the lookup uses the
// last segment, the error message the full path.
template <typename T>
T get_field(const json& j, const std::string& origin, const std::string& field,
            const T& fallback, bool required = false) {
  const std::string key = field.substr(field.rfind('.') + 1);
  if (!j.contains(key)) {
    if (required) field_error(origin, field, "missing");
    return fallback;
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    field_error(origin, field, e.what());
  }
}

json parse_or_throw(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(origin + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::invalid_argument("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str(), path);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text,
                                                  const std::string& origin) {
  const json j = parse_or_throw(text, origin);
  ExperimentConfig c;
  try {
    c.task = metrics::task_from_string(
        get_field<std::string>(j, origin, "task", "", true));
  } catch (const std::invalid_argument& e) {
    field_error(origin, "task", e.what());
  }
  c.dataset_root =
      get_field<std::string>(j, origin, "dataset_root", "", true);
  c.output_dir = get_field<std::string>(j, origin, "output_dir", "", true);
  if (const char* env = std::getenv("HISTOSEG_DATA_ROOT"))
    if (*env) c.dataset_root = env;

  if (j.contains("network")) {
    try {
      c.network = netgraph::NetworkConfig::from_document(j.at("network").dump());
    } catch (const std::exception& e) {
      field_error(origin, "network", e.what());
    }
  }
  // The head must fit the task; default it rather than demanding both.
  if (!j.contains("network") || !j.at("network").contains("head"))
    c.network.head = c.task == metrics::Task::digestpath
                         ? netgraph::Head::binary_2class
                         : netgraph::Head::multiclass_4;

  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    c.schedule.initial_lr = get_field<double>(s, origin, "schedule.initial_lr",
                                              c.schedule.initial_lr);
    c.schedule.lr_decay =
        get_field<double>(s, origin, "schedule.lr_decay", c.schedule.lr_decay);
    c.schedule.iterations_per_epoch =
        get_field<int>(s, origin, "schedule.iterations_per_epoch",
                       c.schedule.iterations_per_epoch);
    c.schedule.epochs =
        get_field<int>(s, origin, "schedule.epochs", c.schedule.epochs);
  } else if (c.task == metrics::Task::gleason) {
    c.schedule.iterations_per_epoch = 250;
    c.schedule.epochs = 400;
  }

  try {
    c.label_source = sampler::label_source_from_string(get_field<std::string>(
        j, origin, "label_source", to_string(c.label_source)));
  } catch (const std::invalid_argument& e) {
    field_error(origin, "label_source", e.what());
  }
  c.annotator_id = get_field<std::string>(j, origin, "annotator_id", "");
  c.train_seed =
      get_field<std::uint64_t>(j, origin, "train_seed", c.train_seed);
  c.validate_every =
      get_field<int>(j, origin, "validate_every", c.validate_every);

  if (j.contains("folds")) {
    const json& f = j.at("folds");
    c.folds.k = get_field<int>(f, origin, "folds.k", c.folds.k);
    c.folds.seed =
        get_field<std::uint64_t>(f, origin, "folds.seed", c.folds.seed);
    c.folds.validation_fold = get_field<int>(
        f, origin, "folds.validation_fold", c.folds.validation_fold);
  }
  if (j.contains("index")) {
    const json& i = j.at("index");
    c.index.center_cap =
        get_field<int>(i, origin, "index.center_cap", c.index.center_cap);
    c.index.seed =
        get_field<std::uint64_t>(i, origin, "index.seed", c.index.seed);
  }
  if (j.contains("mask")) {
    const json& m = j.at("mask");
    c.mask.radius = get_field<int>(m, origin, "mask.radius", c.mask.radius);
    c.mask.min_hole_area =
        get_field<int>(m, origin, "mask.min_hole_area", c.mask.min_hole_area);
  }
  if (j.contains("infer")) {
    const json& i = j.at("infer");
    c.infer.overlap =
        get_field<int>(i, origin, "infer.overlap", c.infer.overlap);
    try {
      c.infer.window = infer::window_from_string(get_field<std::string>(
          i, origin, "infer.window", to_string(c.infer.window)));
    } catch (const std::invalid_argument& e) {
      field_error(origin, "infer.window", e.what());
    }
  }
  c.sampler_cache_images = get_field<int>(j, origin, "sampler_cache_images",
                                          c.sampler_cache_images);
  c.validate();
  return c;
}

std::string ExperimentConfig::canonical_document() const {
  json j;
  j["task"] = metrics::to_string(task);
  j["dataset_root"] = dataset_root;
  j["output_dir"] = output_dir;
  j["network"] = json::parse(network.to_document());
  j["schedule"] = {{"initial_lr", schedule.initial_lr},
                   {"lr_decay", schedule.lr_decay},
                   {"iterations_per_epoch", schedule.iterations_per_epoch},
                   {"epochs", schedule.epochs}};
  j["label_source"] = to_string(label_source);
  j["annotator_id"] = annotator_id;
  j["train_seed"] = train_seed;
  j["validate_every"] = validate_every;
  j["folds"] = {{"k", folds.k},
                {"seed", folds.seed},
                {"validation_fold", folds.validation_fold}};
  j["index"] = {{"center_cap", index.center_cap}, {"seed", index.seed}};
  j["mask"] = {{"radius", mask.radius},
               {"min_hole_area", mask.min_hole_area}};
  j["infer"] = {{"overlap", infer.overlap},
                {"window", to_string(infer.window)}};
  j["sampler_cache_images"] = sampler_cache_images;
  return j.dump(1) + "\n";
}

std::uint64_t ExperimentConfig::hash() const {
  const std::string doc = canonical_document();
  return fnv1a64(doc.data(), doc.size());
}

void ExperimentConfig::validate() const {
  network.validate();
  schedule.validate();
  const int want = task == metrics::Task::digestpath ? 2 : 4;
  if (network.head_channels() != want)
    throw std::invalid_argument(
        std::string("field 'network.head': task ") + metrics::to_string(task) +
        " needs " + std::to_string(want) + " output channels, configured " +
        std::to_string(network.head_channels()));
  if (label_source == sampler::LabelSource::single_annotator &&
      annotator_id.empty())
    throw std::invalid_argument(
        "field 'annotator_id': required for label_source single_annotator");
  if (folds.k < 2)
    throw std::invalid_argument("field 'folds.k': must be at least 2");
  if (folds.validation_fold < 0 || folds.validation_fold >= folds.k)
    throw std::invalid_argument(
        "field 'folds.validation_fold': outside [0,k)");
  if (infer.overlap < 0 || infer.overlap >= network.patch_side)
    throw std::invalid_argument(
        "field 'infer.overlap': must lie in [0, patch_side)");
  if (validate_every < 0)
    throw std::invalid_argument("field 'validate_every': negative");
  if (output_dir.empty())
    throw std::invalid_argument("field 'output_dir': empty");
}

void ExperimentConfig::validate_paths() const {
  if (!fs::is_directory(dataset_root))
    throw std::invalid_argument("dataset_root '" + dataset_root +
                                "' is not a directory");
}

trainer::LossMode ExperimentConfig::loss_mode() const {
  return task == metrics::Task::digestpath ? trainer::LossMode::binary_ce
                                           : trainer::LossMode::categorical_ce;
}

sampler::IndexConfig ExperimentConfig::index_config() const {
  sampler::IndexConfig cfg;
  cfg.task = task;
  cfg.center_cap = index.center_cap;
  cfg.seed = index.seed;
  cfg.mask = mask;
  return cfg;
}

sampler::SamplerConfig ExperimentConfig::sampler_config() const {
  sampler::SamplerConfig cfg;
  cfg.patch_side = network.patch_side;
  cfg.label_source = label_source;
  cfg.annotator_id = annotator_id;
  cfg.cache_images = sampler_cache_images;
  return cfg;
}

trainer::TrainConfig ExperimentConfig::train_config() const {
  trainer::TrainConfig cfg;
  cfg.schedule = schedule;
  cfg.loss = loss_mode();
  cfg.seed = train_seed;
  cfg.validate_every = validate_every;
  cfg.config_hash = hash();
  cfg.out_dir = output_dir;
  return cfg;
}

void prepare_experiment_dir(const ExperimentConfig& config) {
  const fs::path root(config.output_dir);
  for (const char* sub :
       {"config", "checkpoints", "predictions", "reports", "logs"})
    fs::create_directories(root / sub);
  const fs::path hash_file = root / "config" / "hash.txt";
  const std::string hash_hex = [&] {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config.hash()));
    return std::string(buf);
  }();
  if (fs::exists(hash_file)) {
    std::ifstream in(hash_file);
    std::string existing;
    in >> existing;
    if (existing != hash_hex)
      throw std::runtime_error(
          "output directory '" + config.output_dir +
          "' belongs to a different configuration (hash " + existing +
          ", this config is " + hash_hex + ")");
  }
  std::ofstream(root / "config" / "experiment.json", std::ios::binary)
      << config.canonical_document();
  std::ofstream(hash_file, std::ios::binary) << hash_hex << "\n";
}

}  // namespace histoseg
