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

// Command-line front end. Every run is driven by one JSON experiment
// document; artifacts land in the experiment directory next to the hash
// of the configuration that produced them.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "histoseg/experiment.hpp"
#include "histoseg/infer/stitch.hpp"
#include "histoseg/infer/tiles.hpp"
#include "histoseg/io/image_io.hpp"
#include "histoseg/labels/labels.hpp"
#include "histoseg/netgraph/executor.hpp"
#include "histoseg/netgraph/gradcheck.hpp"
#include "histoseg/netgraph/network.hpp"
#include "histoseg/preprocess/color.hpp"
#include "histoseg/preprocess/tissue.hpp"
#include "histoseg/sampler/index.hpp"
#include "histoseg/trainer/checkpoint.hpp"
#include "histoseg/trainer/folds.hpp"
#include "histoseg/trainer/train.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace histoseg;

namespace {

std::string hash_hex(std::uint64_t hash) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

std::string default_index_path(const ExperimentConfig& cfg) {
  return (fs::path(cfg.dataset_root) / "histoseg-index.json").string();
}

std::string default_folds_path(const ExperimentConfig& cfg) {
  return (fs::path(cfg.output_dir) / "config" / "folds.json").string();
}

/// Loads the index sidecar, building and persisting it first if absent.
sampler::DatasetIndex ensure_index(const ExperimentConfig& cfg,
                                   std::string path) {
  if (path.empty()) path = default_index_path(cfg);
  if (fs::exists(path)) {
    sampler::DatasetIndex index = sampler::load_index(path);
    if (index.task != cfg.task)
      throw std::runtime_error("index '" + path + "' was built for task " +
                               std::string(metrics::to_string(index.task)));
    return index;
  }
  cfg.validate_paths();
  std::cerr << "building index for " << cfg.dataset_root << "\n";
  sampler::DatasetIndex index = sampler::build_index(cfg.dataset_root,
                                                     cfg.index_config());
  for (const std::string& w : index.warnings)
    std::cerr << "index warning: " << w << "\n";
  sampler::save_index(index, path);
  return index;
}

trainer::FoldPlan ensure_folds(const ExperimentConfig& cfg,
                               const sampler::DatasetIndex& index,
                               std::string path) {
  if (path.empty()) path = default_folds_path(cfg);
  if (fs::exists(path)) return trainer::load_folds(path);
  std::vector<std::string> ids;
  for (const sampler::IndexEntry& e : index.entries) ids.push_back(e.image_id);
  trainer::FoldPlan plan = trainer::make_folds(ids, cfg.folds.k,
                                               cfg.folds.seed,
                                               cfg.folds.validation_fold);
  fs::create_directories(fs::path(path).parent_path());
  trainer::save_folds(plan, path);
  return plan;
}

const sampler::IndexEntry& find_entry(const sampler::DatasetIndex& index,
                                      const std::string& image_id) {
  for (const sampler::IndexEntry& e : index.entries)
    if (e.image_id == image_id) return e;
  throw std::runtime_error("image '" + image_id + "' is not in the index (" +
                           std::to_string(index.entries.size()) +
                           " entries)");
}

/// Evaluation reference. Two-class: the lesion map. Grading: the
/// majority-vote fusion of all annotators, tissue-gated.
labels::GradeMap load_truth(const ExperimentConfig& cfg,
                            const sampler::DatasetIndex& index,
                            const sampler::IndexEntry& entry) {
  const fs::path root(index.root);
  if (cfg.task == metrics::Task::digestpath) {
    const TissueMask raw =
        io::load_mask((root / "labels" / (entry.image_id + ".png")).string());
    labels::GradeMap map(raw.height, raw.width,
                         labels::ClassSpace::digestpath_binary);
    for (int y = 0; y < raw.height; ++y)
      for (int x = 0; x < raw.width; ++x) map.set(y, x, raw.at(y, x) ? 1 : 0);
    return map;
  }
  const RgbImage rgb = io::load_rgb((root / entry.image_path).string());
  const TissueMask tissue =
      entry.mask_path.empty()
          ? preprocess::make_tissue_mask(rgb, index.mask)
          : io::load_mask((root / entry.mask_path).string());
  labels::AnnotationSet set;
  set.image_id = entry.image_id;
  set.tissue = tissue;
  for (const sampler::AnnotatorCenters& ac : entry.annotators) {
    if (ac.annotator_id == "majority") continue;
    labels::Annotation a;
    a.annotator_id = ac.annotator_id;
    a.map = labels::apply_tissue_gate(
        labels::merge_low_grades(io::load_grade_map(
            (root / "labels" / ac.annotator_id / (entry.image_id + ".png"))
                .string(),
            labels::ClassSpace::gleason_raw)),
        tissue);
    set.maps.push_back(std::move(a));
  }
  return labels::majority_vote(set);
}

infer::StitchedPrediction predict_entry(netgraph::Network& net,
                                        const ExperimentConfig& cfg,
                                        const sampler::DatasetIndex& index,
                                        const sampler::IndexEntry& entry) {
  const RgbImage rgb =
      io::load_rgb((fs::path(index.root) / entry.image_path).string());
  const SixChannelImage six = preprocess::to_six_channel(rgb);
  const infer::TilePlan plan = infer::plan_tiles(
      six.height, six.width, cfg.network.patch_side, cfg.infer.overlap);
  infer::NetworkPredictor predictor(net);
  return infer::predict_image(predictor, six, plan, cfg.infer.window);
}

void write_prediction(const ExperimentConfig& cfg, const std::string& dir,
                      const sampler::IndexEntry& entry,
                      const infer::StitchedPrediction& pred, int epoch) {
  fs::create_directories(dir);
  const labels::GradeMap map = infer::decode(pred);
  io::save_grade_map((fs::path(dir) / "class_map.png").string(), map);
  for (int c = 0; c < pred.channels; ++c) {
    const std::vector<std::uint8_t> bytes = infer::probability_bytes(pred, c);
    io::save_gray(
        (fs::path(dir) / ("prob_class" + std::to_string(c) + ".png")).string(),
        bytes.data(), pred.height, pred.width);
  }
  const RgbImage rgb = io::load_rgb(
      (fs::path(cfg.dataset_root) / entry.image_path).string());
  io::save_rgb((fs::path(dir) / "overlay.png").string(),
               infer::overlay_contours(rgb, map));
  json meta;
  meta["image_id"] = entry.image_id;
  meta["config_hash"] = hash_hex(cfg.hash());
  meta["checkpoint_epoch"] = epoch;
  meta["overlap"] = cfg.infer.overlap;
  meta["window"] = infer::to_string(cfg.infer.window);
  std::ofstream((fs::path(dir) / "meta.json").string(), std::ios::binary)
      << meta.dump(1) << "\n";
}

// ---------------------------------------------------------------- index

int cmd_index(const std::string& config_path, const std::string& out) {
  const ExperimentConfig cfg = ExperimentConfig::load(config_path);
  cfg.validate_paths();
  sampler::DatasetIndex index =
      sampler::build_index(cfg.dataset_root, cfg.index_config());
  for (const std::string& w : index.warnings)
    std::cerr << "warning: " << w << "\n";
  const std::string path = out.empty() ? default_index_path(cfg) : out;
  sampler::save_index(index, path);
  std::cout << "indexed " << index.entries.size() << " image(s) -> " << path
            << "\n";
  return 0;
}

// ----------------------------------------------------------------- mask

int cmd_mask(const std::string& image, const std::string& out, int radius,
             int min_hole_area) {
  preprocess::MaskConfig cfg;
  cfg.radius = radius;
  cfg.min_hole_area = min_hole_area;
  const RgbImage rgb = io::load_rgb(image);
  const TissueMask mask = preprocess::make_tissue_mask(rgb, cfg);
  io::save_mask(out, mask);
  std::cout << "tissue pixels: " << mask.count() << " of "
            << static_cast<std::size_t>(mask.height) * mask.width << " -> "
            << out << "\n";
  return 0;
}

// ----------------------------------------------------------- fuse-labels

int cmd_fuse_labels(const std::vector<std::string>& inputs,
                    const std::string& mask_path, const std::string& mode,
                    const std::string& out) {
  const TissueMask tissue = io::load_mask(mask_path);
  labels::AnnotationSet set;
  set.image_id = fs::path(out).stem().string();
  set.tissue = tissue;
  for (const std::string& path : inputs) {
    labels::Annotation a;
    a.annotator_id = fs::path(path).stem().string();
    a.map = labels::apply_tissue_gate(
        labels::merge_low_grades(
            io::load_grade_map(path, labels::ClassSpace::gleason_raw)),
        tissue);
    set.maps.push_back(std::move(a));
  }
  if (mode == "majority") {
    io::save_grade_map(out, labels::majority_vote(set));
    std::cout << "fused " << inputs.size() << " annotation(s) -> " << out
              << "\n";
  } else if (mode == "probabilistic") {
    const labels::ProbTarget votes = labels::prob_encode(set);
    const fs::path base(out);
    const fs::path stem = base.parent_path() / base.stem();
    for (int c = 0; c < votes.channels; ++c) {
      std::vector<std::uint8_t> bytes(
          static_cast<std::size_t>(votes.height) * votes.width);
      for (int y = 0; y < votes.height; ++y)
        for (int x = 0; x < votes.width; ++x)
          bytes[static_cast<std::size_t>(y) * votes.width + x] =
              static_cast<std::uint8_t>(
                  std::lround(255.0 * votes.at(y, x, c)));
      const std::string path =
          stem.string() + "_class" + std::to_string(c) + ".png";
      io::save_gray(path, bytes.data(), votes.height, votes.width);
      std::cout << "vote frequencies for class " << c << " -> " << path
                << "\n";
    }
  } else {
    throw std::invalid_argument("mode must be majority or probabilistic");
  }
  return 0;
}

// ---------------------------------------------------------------- folds

int cmd_folds(const std::string& config_path, const std::string& index_path,
              const std::string& out) {
  const ExperimentConfig cfg = ExperimentConfig::load(config_path);
  prepare_experiment_dir(cfg);
  const sampler::DatasetIndex index = ensure_index(cfg, index_path);
  const std::string path = out.empty() ? default_folds_path(cfg) : out;
  if (fs::exists(path))
    throw std::runtime_error("fold plan '" + path +
                             "' already exists; delete it to re-split");
  std::vector<std::string> ids;
  for (const sampler::IndexEntry& e : index.entries) ids.push_back(e.image_id);
  const trainer::FoldPlan plan = trainer::make_folds(
      ids, cfg.folds.k, cfg.folds.seed, cfg.folds.validation_fold);
  trainer::save_folds(plan, path);
  for (int f = 0; f < plan.k; ++f)
    std::cout << "fold " << f << ": " << plan.members(f).size() << " image(s)"
              << (f == plan.validation_fold ? " (validation)" : "") << "\n";
  std::cout << "-> " << path << "\n";
  return 0;
}

// ---------------------------------------------------------------- train

int cmd_train(const std::string& config_path, const std::string& index_path,
              bool resume) {
  const ExperimentConfig cfg = ExperimentConfig::load(config_path);
  cfg.validate_paths();
  prepare_experiment_dir(cfg);
  const sampler::DatasetIndex index = ensure_index(cfg, index_path);
  const trainer::FoldPlan folds = ensure_folds(cfg, index, "");

  netgraph::Network net = build_network(cfg.network, cfg.train_seed);
  std::cout << "network: " << netgraph::count_parameters(net)
            << " parameters\n";

  trainer::ValidationFn validate;
  if (cfg.validate_every > 0) {
    validate = [&cfg, &index, &folds](netgraph::Network& n,
                                      int epoch) -> metrics::EvaluationReport {
      std::vector<labels::GradeMap> preds, truths;
      std::vector<metrics::EvalInput> eval;
      const std::vector<std::string> members =
          folds.members(folds.validation_fold);
      preds.reserve(members.size());
      truths.reserve(members.size());
      for (const std::string& id : members) {
        const sampler::IndexEntry& entry = find_entry(index, id);
        preds.push_back(infer::decode(predict_entry(n, cfg, index, entry)));
        truths.push_back(load_truth(cfg, index, entry));
        eval.push_back({id, &preds.back(), &truths.back()});
      }
      const metrics::EvaluationReport report =
          metrics::evaluate(eval, cfg.task, folds.validation_fold);
      std::cout << "epoch " << epoch << " validation "
                << metrics::headline_metric(report) << "\n";
      return report;
    };
  }

  trainer::TrainConfig train_cfg = cfg.train_config();
  train_cfg.resume = resume;
  const trainer::TrainResult result = trainer::train(
      net, index, &folds, cfg.sampler_config(), train_cfg, validate);
  std::cout << "trained " << result.epochs_completed
            << " epoch(s), final mean loss " << result.final_mean_loss << "\n"
            << "last checkpoint: " << result.last_checkpoint << "\n";
  if (!result.best_checkpoint.empty())
    std::cout << "best checkpoint: " << result.best_checkpoint << " (epoch "
              << result.best_epoch << ", metric " << result.best_metric
              << ")\n";
  return 0;
}

// -------------------------------------------------------------- predict

int cmd_predict(const std::string& config_path, const std::string& index_path,
                std::string checkpoint, std::vector<std::string> images,
                std::string out_dir) {
  const ExperimentConfig cfg = ExperimentConfig::load(config_path);
  cfg.validate_paths();
  prepare_experiment_dir(cfg);
  const sampler::DatasetIndex index = ensure_index(cfg, index_path);
  if (checkpoint.empty())
    checkpoint =
        (fs::path(cfg.output_dir) / "checkpoints" / "last.ckpt").string();
  if (out_dir.empty())
    out_dir = (fs::path(cfg.output_dir) / "predictions").string();

  netgraph::Network net = build_network(cfg.network, cfg.train_seed);
  const trainer::CheckpointMeta meta =
      trainer::load_checkpoint(checkpoint, &net.params, nullptr, cfg.hash());

  if (images.empty()) {
    const trainer::FoldPlan folds = ensure_folds(cfg, index, "");
    images = folds.members(folds.validation_fold);
  }
  for (const std::string& id : images) {
    const sampler::IndexEntry& entry = find_entry(index, id);
    const infer::StitchedPrediction pred =
        predict_entry(net, cfg, index, entry);
    write_prediction(cfg, (fs::path(out_dir) / id).string(), entry, pred,
                     meta.epoch);
    std::cout << "predicted " << id << " (" << entry.height << "x"
              << entry.width << ")\n";
  }
  return 0;
}

// ------------------------------------------------------------- evaluate

int cmd_evaluate(const std::string& config_path, const std::string& index_path,
                 std::string pred_dir) {
  const ExperimentConfig cfg = ExperimentConfig::load(config_path);
  cfg.validate_paths();
  const sampler::DatasetIndex index = ensure_index(cfg, index_path);
  if (pred_dir.empty())
    pred_dir = (fs::path(cfg.output_dir) / "predictions").string();
  if (!fs::is_directory(pred_dir))
    throw std::runtime_error("no predictions under '" + pred_dir + "'");

  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(pred_dir))
    if (e.is_directory() && fs::exists(e.path() / "class_map.png"))
      ids.push_back(e.path().filename().string());
  std::sort(ids.begin(), ids.end());
  if (ids.empty())
    throw std::runtime_error("no completed predictions under '" + pred_dir +
                             "'");

  const std::string want_hash = hash_hex(cfg.hash());
  std::vector<labels::GradeMap> preds, truths;
  std::vector<metrics::EvalInput> eval;
  preds.reserve(ids.size());
  truths.reserve(ids.size());
  for (const std::string& id : ids) {
    const fs::path dir = fs::path(pred_dir) / id;
    std::ifstream meta_in(dir / "meta.json");
    if (!meta_in)
      throw std::runtime_error("prediction '" + id + "' has no meta.json");
    json meta;
    meta_in >> meta;
    const std::string got = meta.value("config_hash", "");
    if (got != want_hash)
      throw std::runtime_error(
          "prediction '" + id + "' was produced under configuration " + got +
          ", this configuration is " + want_hash + "; refusing to mix");
    const sampler::IndexEntry& entry = find_entry(index, id);
    preds.push_back(io::load_grade_map(
        (dir / "class_map.png").string(),
        cfg.task == metrics::Task::digestpath
            ? labels::ClassSpace::digestpath_binary
            : labels::ClassSpace::gleason_merged));
    truths.push_back(load_truth(cfg, index, entry));
    eval.push_back({id, &preds.back(), &truths.back()});
  }

  const metrics::EvaluationReport report =
      metrics::evaluate(eval, cfg.task, cfg.folds.validation_fold);
  const fs::path reports = fs::path(cfg.output_dir) / "reports";
  fs::create_directories(reports);
  const std::string stem =
      "evaluation_fold" + std::to_string(report.fold_id);
  std::ofstream((reports / (stem + ".json")).string(), std::ios::binary)
      << metrics::report_to_json(report);
  std::ofstream((reports / (stem + ".txt")).string(), std::ios::binary)
      << metrics::render_text(report);
  std::cout << metrics::render_text(report);
  std::cout << "-> " << (reports / (stem + ".json")).string() << "\n";
  return 0;
}

// --------------------------------------------------------------- report

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double mean_loss = 0.0;
  bool has_validation = false;
  double validation = 0.0;
};

std::string curves_svg(const std::vector<EpochRecord>& recs) {
  const int w = 720, h = 360, ml = 60, mr = 60, mt = 20, mb = 40;
  const double px = w - ml - mr, py = h - mt - mb;
  double loss_max = 0.0, val_min = 0.0, val_max = 0.0;
  bool any_val = false;
  for (const EpochRecord& r : recs) {
    loss_max = std::max(loss_max, r.mean_loss);
    if (r.has_validation) {
      if (!any_val || r.validation < val_min) val_min = r.validation;
      if (!any_val || r.validation > val_max) val_max = r.validation;
      any_val = true;
    }
  }
  if (loss_max <= 0.0) loss_max = 1.0;
  const double val_span = val_max > val_min ? val_max - val_min : 1.0;
  const int last_epoch = recs.empty() ? 1 : recs.back().epoch;
  const double ex = px / std::max(1, last_epoch);

  std::ostringstream svg;
  char buf[256];
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w
      << "' height='" << h << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n";
  std::snprintf(buf, sizeof(buf),
                "<line x1='%d' y1='%d' x2='%d' y2='%d' stroke='black'/>\n",
                ml, h - mb, w - mr, h - mb);
  svg << buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1='%d' y1='%d' x2='%d' y2='%d' stroke='black'/>\n",
                ml, mt, ml, h - mb);
  svg << buf;
  svg << "<text x='" << ml << "' y='" << h - 10
      << "' font-size='12'>epoch</text>\n"
      << "<text x='8' y='" << mt + 12
      << "' font-size='12' fill='crimson'>loss</text>\n";
  if (any_val)
    svg << "<text x='" << w - mr + 4 << "' y='" << mt + 12
        << "' font-size='12' fill='steelblue'>metric</text>\n";

  svg << "<polyline fill='none' stroke='crimson' points='";
  for (const EpochRecord& r : recs) {
    std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", ml + ex * r.epoch,
                  mt + py * (1.0 - r.mean_loss / loss_max));
    svg << buf;
  }
  svg << "'/>\n";
  if (any_val) {
    svg << "<polyline fill='none' stroke='steelblue' points='";
    for (const EpochRecord& r : recs) {
      if (!r.has_validation) continue;
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", ml + ex * r.epoch,
                    mt + py * (1.0 - (r.validation - val_min) / val_span));
      svg << buf;
    }
    svg << "'/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x='%d' y='%d' font-size='10'>%.4f</text>\n",
                  w - mr + 4, mt + 24, val_max);
    svg << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x='%d' y='%d' font-size='10'>%.4f</text>\n",
                  w - mr + 4, h - mb, val_min);
    svg << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "<text x='8' y='%d' font-size='10'>%.4f</text>\n", mt + 26,
                loss_max);
  svg << buf;
  svg << "</svg>\n";
  return svg.str();
}

int cmd_report(const std::string& config_path) {
  const ExperimentConfig cfg = ExperimentConfig::load(config_path);
  const fs::path reports = fs::path(cfg.output_dir) / "reports";
  fs::create_directories(reports);

  std::vector<std::string> report_files;
  if (fs::is_directory(reports))
    for (const auto& e : fs::directory_iterator(reports)) {
      const std::string name = e.path().filename().string();
      if (name.rfind("evaluation_fold", 0) == 0 &&
          e.path().extension() == ".json")
        report_files.push_back(e.path().string());
    }
  std::sort(report_files.begin(), report_files.end());

  std::vector<metrics::EvaluationReport> fold_reports;
  for (const std::string& path : report_files) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    fold_reports.push_back(metrics::report_from_json(buf.str()));
  }

  std::ostringstream summary;
  if (static_cast<int>(fold_reports.size()) < cfg.folds.k)
    summary << "PARTIAL REPORT: " << fold_reports.size() << " of "
            << cfg.folds.k << " fold(s) evaluated\n\n";
  for (const metrics::EvaluationReport& r : fold_reports)
    summary << metrics::render_text(r) << "\n";
  if (fold_reports.size() > 1) {
    const metrics::EvaluationReport avg =
        metrics::average_folds(fold_reports);
    summary << "cross-fold mean: headline "
            << metrics::headline_metric(avg) << "\n";
  }
  std::ofstream((reports / "summary.txt").string(), std::ios::binary)
      << summary.str();
  if (!fold_reports.empty())
    std::ofstream((reports / "summary.csv").string(), std::ios::binary)
        << metrics::render_csv(fold_reports);

  const netgraph::Network net = build_network(cfg.network, cfg.train_seed);
  std::ofstream((reports / "architecture.txt").string(), std::ios::binary)
      << netgraph::architecture_report(net);

  const fs::path log_path = fs::path(cfg.output_dir) / "logs" / "train.jsonl";
  if (fs::exists(log_path)) {
    std::vector<EpochRecord> recs;
    std::ifstream log(log_path);
    std::string line;
    while (std::getline(log, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      EpochRecord r;
      r.epoch = j.at("epoch").get<int>();
      r.lr = j.at("lr").get<double>();
      r.mean_loss = j.at("mean_loss").get<double>();
      if (j.contains("validation")) {
        r.has_validation = true;
        r.validation = j.at("validation").at("metric").get<double>();
      }
      recs.push_back(r);
    }
    std::ofstream((reports / "training_curves.svg").string(),
                  std::ios::binary)
        << curves_svg(recs);
  }
  std::cout << summary.str();
  std::cout << "-> " << reports.string() << "\n";
  return fold_reports.empty() && !fs::exists(log_path) ? 1 : 0;
}

// ------------------------------------------------------------- gradcheck

int cmd_gradcheck(const std::string& config_name, int growth_rate,
                  std::vector<int> blocks, int patch_side,
                  const std::string& head, int probes, std::uint64_t seed) {
  netgraph::NetworkConfig net_cfg;
  if (config_name.empty() || config_name == "micro") {
    net_cfg.growth_rate = 2;
    net_cfg.encoder_blocks = {1, 1};
    net_cfg.patch_side = 16;
    net_cfg.head = netgraph::Head::multiclass_4;
  } else {
    net_cfg = ExperimentConfig::load(config_name).network;
  }
  if (growth_rate > 0) net_cfg.growth_rate = growth_rate;
  if (!blocks.empty()) {
    net_cfg.encoder_blocks = blocks;
    net_cfg.decoder_blocks.clear();
  }
  if (patch_side > 0) net_cfg.patch_side = patch_side;
  if (!head.empty()) net_cfg.head = netgraph::head_from_string(head);

  netgraph::GradCheckOptions opts;
  opts.probe_count = probes;
  opts.seed = seed;
  opts.side = net_cfg.patch_side;
  const netgraph::GradCheckResult result =
      netgraph::gradient_check(net_cfg, opts);
  std::printf("max relative error over %d probes: %.3e\n",
              static_cast<int>(result.probes.size()), result.max_error);
  constexpr double kThreshold = 1e-4;
  if (result.max_error <= kThreshold) {
    std::printf("PASS (threshold %.1e)\n", kThreshold);
    return 0;
  }
  std::printf("FAIL (threshold %.1e)\n", kThreshold);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "histology segmentation pipeline: indexing, training, tiled "
      "inference, evaluation"};
  app.require_subcommand(1);

  std::string config_path, index_path, out, image, mask_path, mode;
  std::string checkpoint, pred_dir, head;
  std::vector<std::string> inputs, images;
  std::vector<int> blocks;
  int radius = 5, min_hole_area = 1024;
  int growth_rate = 0, patch_side = 0, probes = 50;
  std::uint64_t seed = 7;
  bool resume = false;

  CLI::App* c_index = app.add_subcommand(
      "index", "scan a dataset and persist candidate patch centers");
  c_index->add_option("--config", config_path, "experiment JSON")->required();
  c_index->add_option("--out", out, "index path (default: dataset sidecar)");

  CLI::App* c_mask =
      app.add_subcommand("mask", "compute a tissue mask for one image");
  c_mask->add_option("--image", image, "input image")->required();
  c_mask->add_option("--out", out, "output mask path")->required();
  c_mask->add_option("--radius", radius, "morphology disk radius");
  c_mask->add_option("--min-hole-area", min_hole_area,
                     "background holes below this become tissue");

  CLI::App* c_fuse = app.add_subcommand(
      "fuse-labels", "fuse annotator grade maps (majority or vote shares)");
  c_fuse->add_option("--inputs", inputs, "raw grade maps, one per annotator")
      ->required()
      ->expected(-1);
  c_fuse->add_option("--mask", mask_path, "tissue mask")->required();
  c_fuse->add_option("--mode", mode, "majority | probabilistic")->required();
  c_fuse->add_option("--out", out, "output path (or prefix)")->required();

  CLI::App* c_folds = app.add_subcommand(
      "folds", "split indexed images into cross-validation folds");
  c_folds->add_option("--config", config_path, "experiment JSON")->required();
  c_folds->add_option("--index", index_path, "index path");
  c_folds->add_option("--out", out, "fold plan path");

  CLI::App* c_train = app.add_subcommand("train", "run the training loop");
  c_train->add_option("--config", config_path, "experiment JSON")->required();
  c_train->add_option("--index", index_path, "index path");
  c_train->add_flag("--resume", resume, "continue from checkpoints/last.ckpt");

  CLI::App* c_predict = app.add_subcommand(
      "predict", "tiled whole-image inference from a checkpoint");
  c_predict->add_option("--config", config_path, "experiment JSON")
      ->required();
  c_predict->add_option("--index", index_path, "index path");
  c_predict->add_option("--checkpoint", checkpoint,
                        "default: checkpoints/last.ckpt");
  c_predict->add_option("--images", images,
                        "image ids (default: validation fold)");
  c_predict->add_option("--out-dir", out, "default: predictions/");

  CLI::App* c_eval = app.add_subcommand(
      "evaluate", "score predictions against reference maps");
  c_eval->add_option("--config", config_path, "experiment JSON")->required();
  c_eval->add_option("--index", index_path, "index path");
  c_eval->add_option("--pred-dir", pred_dir, "default: predictions/");

  CLI::App* c_report = app.add_subcommand(
      "report", "summary tables, architecture report, training curves");
  c_report->add_option("--config", config_path, "experiment JSON")->required();

  CLI::App* c_grad = app.add_subcommand(
      "gradcheck", "finite-difference gradient check on a small network");
  c_grad->add_option("--config", config_path,
                     "'micro' (default) or an experiment JSON");
  c_grad->add_option("--growth-rate", growth_rate, "override growth rate");
  c_grad->add_option("--blocks", blocks, "override encoder blocks");
  c_grad->add_option("--patch-side", patch_side, "override input side");
  c_grad->add_option("--head", head, "binary_2class | multiclass_4");
  c_grad->add_option("--probes", probes, "parameters to probe");
  c_grad->add_option("--seed", seed, "probe seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_index->parsed()) return cmd_index(config_path, out);
    if (c_mask->parsed()) return cmd_mask(image, out, radius, min_hole_area);
    if (c_fuse->parsed()) return cmd_fuse_labels(inputs, mask_path, mode, out);
    if (c_folds->parsed()) return cmd_folds(config_path, index_path, out);
    if (c_train->parsed()) return cmd_train(config_path, index_path, resume);
    if (c_predict->parsed())
      return cmd_predict(config_path, index_path, checkpoint, images, out);
    if (c_eval->parsed()) return cmd_evaluate(config_path, index_path, pred_dir);
    if (c_report->parsed()) return cmd_report(config_path);
    if (c_grad->parsed())
      return cmd_gradcheck(config_path, growth_rate, blocks, patch_side, head,
                           probes, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
