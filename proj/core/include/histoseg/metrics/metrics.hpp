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

#ifndef HISTOSEG_METRICS_METRICS_HPP_
#define HISTOSEG_METRICS_METRICS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "histoseg/labels/labels.hpp"

namespace histoseg::metrics {

/// K x K pixel tally; rows index the truth class, columns the prediction.
struct ConfusionMatrix {
  int k = 0;
  std::vector<std::int64_t> counts;  // row major

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int classes)
      : k(classes), counts(static_cast<std::size_t>(classes) * classes, 0) {}

  std::int64_t at(int truth, int pred) const {
    return counts[static_cast<std::size_t>(truth) * k + pred];
  }
  void add(int truth, int pred, std::int64_t n = 1) {
    counts[static_cast<std::size_t>(truth) * k + pred] += n;
  }
  std::int64_t total() const;
  std::int64_t row_sum(int truth) const;
  std::int64_t col_sum(int pred) const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
};

/// Tallies one prediction/truth pair. Both maps must match in size and
/// hold classes below k.
ConfusionMatrix confusion(const labels::GradeMap& pred,
                          const labels::GradeMap& truth, int k);

/// Overlap of the foreground class as a percentage; 100 when neither map
/// has any foreground.
double dice(const ConfusionMatrix& cm);

struct F1Pair {
  double micro = 0.0;
  double macro = 0.0;
};

/// Micro F1 from pooled counts; macro F1 averaged over the classes present
/// in the truth (zero-denominator per-class F1 counts as 0).
F1Pair f1_scores(const ConfusionMatrix& cm);

/// Cohen's kappa; the degenerate all-agreeing single-class case is 1.
double kappa(const ConfusionMatrix& cm);

/// kappa + (macro F1 + micro F1) / 2, the Gleason challenge ranking value.
double challenge_score(const ConfusionMatrix& cm);

double accuracy(const ConfusionMatrix& cm);

enum class Task { digestpath, gleason };
const char* to_string(Task t);
Task task_from_string(const std::string& s);

struct PerImageMetrics {
  std::string image_id;
  bool positive = false;  // digestpath: image contains lesion truth
  double accuracy = 0.0;
  double dice = 0.0;   // digestpath
  double kappa = 0.0;  // gleason
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double score = 0.0;
};

/// One fold's evaluation. Aggregates pool pixels across the fold's images;
/// the image-averaged accuracy is also reported for the binary task since
/// published numbers do not say which convention they used.
struct EvaluationReport {
  Task task = Task::digestpath;
  int fold_id = 0;
  std::vector<PerImageMetrics> per_image;

  double accuracy_positive = 0.0;  // pooled over positive images
  double accuracy_negative = 0.0;  // pooled over negative images
  double accuracy_pooled = 0.0;    // pooled over everything
  double accuracy_image_mean = 0.0;
  double dice_pooled = 0.0;

  double kappa = 0.0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double score = 0.0;
};

struct EvalInput {
  std::string image_id;
  const labels::GradeMap* pred = nullptr;
  const labels::GradeMap* truth = nullptr;
};

EvaluationReport evaluate(const std::vector<EvalInput>& inputs, Task task,
                          int fold_id);

/// Arithmetic mean of the aggregate fields across folds (per_image empty,
/// fold_id = -1).
EvaluationReport average_folds(const std::vector<EvaluationReport>& folds);

/// The single figure used to rank models: pooled DICE on the two-class
/// task, the combined kappa/F1 score on the grading task.
double headline_metric(const EvaluationReport& report);

/// Plain-text report: per-image table plus the aggregate block.
std::string render_text(const EvaluationReport& report);

/// CSV: one row per image, then one summary row per fold.
std::string render_csv(const std::vector<EvaluationReport>& folds);

/// JSON round-trip for persisting reports; writing is byte-stable.
std::string report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const std::string& text);

}  // namespace histoseg::metrics

#endif  // HISTOSEG_METRICS_METRICS_HPP_
