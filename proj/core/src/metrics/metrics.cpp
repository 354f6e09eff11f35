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

#include "histoseg/metrics/metrics.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace histoseg::metrics {

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (std::int64_t c : counts) t += c;
  return t;
}

std::int64_t ConfusionMatrix::row_sum(int truth) const {
  std::int64_t t = 0;
  for (int p = 0; p < k; ++p) t += at(truth, p);
  return t;
}

std::int64_t ConfusionMatrix::col_sum(int pred) const {
  std::int64_t t = 0;
  for (int r = 0; r < k; ++r) t += at(r, pred);
  return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  if (k == 0) *this = ConfusionMatrix(o.k);
  if (k != o.k) throw std::invalid_argument("confusion matrix size mismatch");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
  return *this;
}

ConfusionMatrix confusion(const labels::GradeMap& pred,
                          const labels::GradeMap& truth, int k) {
  if (pred.height != truth.height || pred.width != truth.width)
    throw std::invalid_argument("confusion: size mismatch");
  ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < pred.grades.size(); ++i) {
    const int t = truth.grades[i], p = pred.grades[i];
    if (t >= k || p >= k)
      throw std::invalid_argument("confusion: class " +
                                  std::to_string(std::max(t, p)) +
                                  " outside K=" + std::to_string(k));
    cm.add(t, p);
  }
  return cm;
}

double dice(const ConfusionMatrix& cm) {
  if (cm.k != 2) throw std::invalid_argument("dice needs a binary matrix");
  const std::int64_t tp = cm.at(1, 1);
  const std::int64_t fp = cm.at(0, 1);
  const std::int64_t fn = cm.at(1, 0);
  if (tp + fp + fn == 0) return 100.0;  // both foregrounds empty
  return 200.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

F1Pair f1_scores(const ConfusionMatrix& cm) {
  F1Pair out;
  const std::int64_t total = cm.total();
  if (total == 0) return out;
  std::int64_t trace = 0;
  for (int c = 0; c < cm.k; ++c) trace += cm.at(c, c);
  // single-label micro F1: pooled FP and FN coincide, so this reduces to
  // trace/total; spelled out for transparency against the oracle
  const std::int64_t fp = total - trace, fn = total - trace;
  out.micro = 2.0 * static_cast<double>(trace) /
              static_cast<double>(2 * trace + fp + fn);
  int present = 0;
  double sum = 0.0;
  for (int c = 0; c < cm.k; ++c) {
    if (cm.row_sum(c) == 0) continue;  // class absent from the truth
    ++present;
    const std::int64_t tp_c = cm.at(c, c);
    const std::int64_t denom = cm.row_sum(c) + cm.col_sum(c);
    if (denom > 0)
      sum += 2.0 * static_cast<double>(tp_c) / static_cast<double>(denom);
  }
  out.macro = present > 0 ? sum / present : 0.0;
  return out;
}

double kappa(const ConfusionMatrix& cm) {
  const std::int64_t total = cm.total();
  if (total <= 0) throw std::invalid_argument("kappa: empty matrix");
  std::int64_t trace = 0, expected_num = 0;
  for (int c = 0; c < cm.k; ++c) {
    trace += cm.at(c, c);
    expected_num += cm.row_sum(c) * cm.col_sum(c);
  }
  if (expected_num == total * total) return 1.0;  // both raters constant
  const double po = static_cast<double>(trace) / static_cast<double>(total);
  const double pe = static_cast<double>(expected_num) /
                    (static_cast<double>(total) * static_cast<double>(total));
  return (po - pe) / (1.0 - pe);
}

double challenge_score(const ConfusionMatrix& cm) {
  const F1Pair f1 = f1_scores(cm);
  return kappa(cm) + (f1.macro + f1.micro) / 2.0;
}

double accuracy(const ConfusionMatrix& cm) {
  const std::int64_t total = cm.total();
  if (total == 0) return 0.0;
  std::int64_t trace = 0;
  for (int c = 0; c < cm.k; ++c) trace += cm.at(c, c);
  return static_cast<double>(trace) / static_cast<double>(total);
}

const char* to_string(Task t) {
  return t == Task::digestpath ? "digestpath" : "gleason";
}

Task task_from_string(const std::string& s) {
  if (s == "digestpath") return Task::digestpath;
  if (s == "gleason") return Task::gleason;
  throw std::invalid_argument("unknown task '" + s +
                              "' (expected digestpath or gleason)");
}

EvaluationReport evaluate(const std::vector<EvalInput>& inputs, Task task,
                          int fold_id) {
  if (inputs.empty()) throw std::invalid_argument("evaluate: no images");
  const int k = task == Task::digestpath ? 2 : 4;
  EvaluationReport report;
  report.task = task;
  report.fold_id = fold_id;
  ConfusionMatrix pooled(k), pooled_pos(k), pooled_neg(k);
  double acc_sum = 0.0;
  const labels::ClassSpace want_space = task == Task::digestpath
                                            ? labels::ClassSpace::digestpath_binary
                                            : labels::ClassSpace::gleason_merged;
  for (const EvalInput& in : inputs) {
    if (!in.pred || !in.truth)
      throw std::invalid_argument("evaluate: null map for image '" +
                                  in.image_id + "'");
    if (in.pred->space != want_space || in.truth->space != want_space)
      throw std::invalid_argument("evaluate: image '" + in.image_id +
                                  "' is not in the " +
                                  std::string(to_string(task)) +
                                  " class space");
    const ConfusionMatrix cm = confusion(*in.pred, *in.truth, k);
    PerImageMetrics m;
    m.image_id = in.image_id;
    m.accuracy = accuracy(cm);
    acc_sum += m.accuracy;
    if (task == Task::digestpath) {
      m.positive = cm.row_sum(1) > 0;
      m.dice = dice(cm);
      (m.positive ? pooled_pos : pooled_neg) += cm;
    } else {
      const F1Pair f1 = f1_scores(cm);
      m.kappa = kappa(cm);
      m.micro_f1 = f1.micro;
      m.macro_f1 = f1.macro;
      m.score = challenge_score(cm);
    }
    pooled += cm;
    report.per_image.push_back(std::move(m));
  }
  report.accuracy_pooled = accuracy(pooled);
  report.accuracy_image_mean = acc_sum / static_cast<double>(inputs.size());
  if (task == Task::digestpath) {
    report.accuracy_positive =
        pooled_pos.total() > 0 ? accuracy(pooled_pos) : 0.0;
    report.accuracy_negative =
        pooled_neg.total() > 0 ? accuracy(pooled_neg) : 0.0;
    report.dice_pooled = dice(pooled);
  } else {
    const F1Pair f1 = f1_scores(pooled);
    report.kappa = kappa(pooled);
    report.micro_f1 = f1.micro;
    report.macro_f1 = f1.macro;
    report.score = challenge_score(pooled);
  }
  return report;
}

EvaluationReport average_folds(const std::vector<EvaluationReport>& folds) {
  if (folds.empty()) throw std::invalid_argument("average_folds: no folds");
  EvaluationReport out;
  out.task = folds[0].task;
  out.fold_id = -1;
  const double n = static_cast<double>(folds.size());
  for (const EvaluationReport& f : folds) {
    if (f.task != out.task)
      throw std::invalid_argument("average_folds: mixed tasks");
    out.accuracy_positive += f.accuracy_positive / n;
    out.accuracy_negative += f.accuracy_negative / n;
    out.accuracy_pooled += f.accuracy_pooled / n;
    out.accuracy_image_mean += f.accuracy_image_mean / n;
    out.dice_pooled += f.dice_pooled / n;
    out.kappa += f.kappa / n;
    out.micro_f1 += f.micro_f1 / n;
    out.macro_f1 += f.macro_f1 / n;
    out.score += f.score / n;
  }
  return out;
}

double headline_metric(const EvaluationReport& report) {
  return report.task == Task::digestpath ? report.dice_pooled : report.score;
}

namespace {

std::string fold_label(int fold_id) {
  return fold_id < 0 ? std::string("all") : std::to_string(fold_id);
}

void csv_row(std::ostringstream& os, int fold_id, const char* row_type,
             const std::string& image_id, bool positive, double acc,
             double dice_v, double kappa_v, double micro, double macro,
             double score) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%s,%s,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                fold_label(fold_id).c_str(), row_type, image_id.c_str(),
                positive ? 1 : 0, acc, dice_v, kappa_v, micro, macro, score);
  os << buf;
}

}  // namespace

std::string render_text(const EvaluationReport& report) {
  std::ostringstream os;
  char buf[256];
  os << "task: " << to_string(report.task)
     << "  fold: " << fold_label(report.fold_id) << "\n";
  if (report.task == Task::digestpath) {
    os << "image                     pos  accuracy      dice\n";
    for (const PerImageMetrics& m : report.per_image) {
      std::snprintf(buf, sizeof(buf), "%-24s  %3s  %8.4f  %8.2f\n",
                    m.image_id.c_str(), m.positive ? "yes" : "no", m.accuracy,
                    m.dice);
      os << buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "pooled dice %.2f%%  accuracy pooled %.4f  image-mean %.4f\n"
                  "accuracy positive %.4f  negative %.4f\n",
                  report.dice_pooled, report.accuracy_pooled,
                  report.accuracy_image_mean, report.accuracy_positive,
                  report.accuracy_negative);
    os << buf;
  } else {
    os << "image                     accuracy     kappa  micro_f1  macro_f1  "
          "score\n";
    for (const PerImageMetrics& m : report.per_image) {
      std::snprintf(buf, sizeof(buf), "%-24s  %8.4f  %8.4f  %8.4f  %8.4f  %6.4f\n",
                    m.image_id.c_str(), m.accuracy, m.kappa, m.micro_f1,
                    m.macro_f1, m.score);
      os << buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "pooled kappa %.4f  micro_f1 %.4f  macro_f1 %.4f  score "
                  "%.4f  accuracy %.4f\n",
                  report.kappa, report.micro_f1, report.macro_f1, report.score,
                  report.accuracy_pooled);
    os << buf;
  }
  return os.str();
}

std::string render_csv(const std::vector<EvaluationReport>& folds) {
  std::ostringstream os;
  os << "fold,row,image_id,positive,accuracy,dice,kappa,micro_f1,macro_f1,"
        "score\n";
  for (const EvaluationReport& f : folds) {
    for (const PerImageMetrics& m : f.per_image)
      csv_row(os, f.fold_id, "image", m.image_id, m.positive, m.accuracy,
              m.dice, m.kappa, m.micro_f1, m.macro_f1, m.score);
    csv_row(os, f.fold_id, "fold_summary", "", false, f.accuracy_pooled,
            f.dice_pooled, f.kappa, f.micro_f1, f.macro_f1, f.score);
  }
  if (folds.size() > 1) {
    const EvaluationReport avg = average_folds(folds);
    csv_row(os, avg.fold_id, "overall", "", false, avg.accuracy_pooled,
            avg.dice_pooled, avg.kappa, avg.micro_f1, avg.macro_f1, avg.score);
  }
  return os.str();
}

std::string report_to_json(const EvaluationReport& report) {
  nlohmann::json j;
  j["task"] = to_string(report.task);
  j["fold_id"] = report.fold_id;
  j["accuracy_positive"] = report.accuracy_positive;
  j["accuracy_negative"] = report.accuracy_negative;
  j["accuracy_pooled"] = report.accuracy_pooled;
  j["accuracy_image_mean"] = report.accuracy_image_mean;
  j["dice_pooled"] = report.dice_pooled;
  j["kappa"] = report.kappa;
  j["micro_f1"] = report.micro_f1;
  j["macro_f1"] = report.macro_f1;
  j["score"] = report.score;
  nlohmann::json rows = nlohmann::json::array();
  for (const PerImageMetrics& m : report.per_image)
    rows.push_back({{"image_id", m.image_id},
                    {"positive", m.positive},
                    {"accuracy", m.accuracy},
                    {"dice", m.dice},
                    {"kappa", m.kappa},
                    {"micro_f1", m.micro_f1},
                    {"macro_f1", m.macro_f1},
                    {"score", m.score}});
  j["per_image"] = std::move(rows);
  return j.dump(1) + "\n";
}

EvaluationReport report_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  EvaluationReport report;
  report.task = task_from_string(j.at("task").get<std::string>());
  report.fold_id = j.at("fold_id").get<int>();
  report.accuracy_positive = j.at("accuracy_positive").get<double>();
  report.accuracy_negative = j.at("accuracy_negative").get<double>();
  report.accuracy_pooled = j.at("accuracy_pooled").get<double>();
  report.accuracy_image_mean = j.at("accuracy_image_mean").get<double>();
  report.dice_pooled = j.at("dice_pooled").get<double>();
  report.kappa = j.at("kappa").get<double>();
  report.micro_f1 = j.at("micro_f1").get<double>();
  report.macro_f1 = j.at("macro_f1").get<double>();
  report.score = j.at("score").get<double>();
  for (const nlohmann::json& row : j.at("per_image")) {
    PerImageMetrics m;
    m.image_id = row.at("image_id").get<std::string>();
    m.positive = row.at("positive").get<bool>();
    m.accuracy = row.at("accuracy").get<double>();
    m.dice = row.at("dice").get<double>();
    m.kappa = row.at("kappa").get<double>();
    m.micro_f1 = row.at("micro_f1").get<double>();
    m.macro_f1 = row.at("macro_f1").get<double>();
    m.score = row.at("score").get<double>();
    report.per_image.push_back(std::move(m));
  }
  return report;
}

}  // namespace histoseg::metrics
