#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "hyxnet/ingest.hpp"
#include "hyxnet/tensor.hpp"

namespace hyxnet {

struct EvalReport {
  int classes = 0;
  std::size_t total = 0;
  std::size_t misclassified = 0;
  double accuracy = 0.0;
  std::vector<double> precision, recall, f1;  // per class
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
  Tensor2<std::int64_t> confusion;        // rows = truth, cols = prediction
  Tensor2<double> confusion_normalized;   // row-normalized; all-zero row for absent class
};

/// Counts-only metrics: precision_k = TP/(TP+FP) and recall_k = TP/(TP+FN),
/// each 0 when its denominator is 0; F1 harmonic mean, 0 when P+R = 0; macro
/// averages are unweighted means over all K classes.
inline EvalReport compute_metrics(const std::vector<int>& predictions,
                                  const std::vector<int>& truths, int classes) {
  if (predictions.size() != truths.size()) throw DataError("prediction/truth count mismatch");
  if (predictions.empty()) throw DataError("cannot evaluate an empty set");
  require(classes >= 1, "class count must be positive");

  EvalReport r;
  r.classes = classes;
  r.total = predictions.size();
  r.confusion = Tensor2<std::int64_t>(classes, classes);
  r.confusion.zero();
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int p = predictions[i], t = truths[i];
    if (p < 0 || p >= classes || t < 0 || t >= classes)
      throw DataError("class index out of range in evaluation");
    ++r.confusion(t, p);
  }

  std::int64_t correct = 0;
  for (int k = 0; k < classes; ++k) correct += r.confusion(k, k);
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);
  r.misclassified = r.total - static_cast<std::size_t>(correct);

  r.precision.resize(classes);
  r.recall.resize(classes);
  r.f1.resize(classes);
  for (int k = 0; k < classes; ++k) {
    std::int64_t tp = r.confusion(k, k), row = 0, col = 0;
    for (int j = 0; j < classes; ++j) {
      row += r.confusion(k, j);
      col += r.confusion(j, k);
    }
    r.precision[k] = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    r.recall[k] = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    const double pr = r.precision[k] + r.recall[k];
    r.f1[k] = pr > 0.0 ? 2.0 * r.precision[k] * r.recall[k] / pr : 0.0;
    r.macro_precision += r.precision[k];
    r.macro_recall += r.recall[k];
    r.macro_f1 += r.f1[k];
  }
  r.macro_precision /= classes;
  r.macro_recall /= classes;
  r.macro_f1 /= classes;

  r.confusion_normalized = Tensor2<double>(classes, classes);
  r.confusion_normalized.zero();
  for (int k = 0; k < classes; ++k) {
    std::int64_t row = 0;
    for (int j = 0; j < classes; ++j) row += r.confusion(k, j);
    if (row == 0) continue;
    for (int j = 0; j < classes; ++j)
      r.confusion_normalized(k, j) =
          static_cast<double>(r.confusion(k, j)) / static_cast<double>(row);
  }
  return r;
}

/// Human-readable report body (report.txt).
inline std::string format_report(const EvalReport& r, const LabelMap& labels) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "samples: %zu\nmisclassified: %zu\naccuracy: %.6f\n", r.total,
                r.misclassified, r.accuracy);
  out += buf;
  std::snprintf(buf, sizeof(buf), "macro precision: %.6f\nmacro recall: %.6f\nmacro f1: %.6f\n\n",
                r.macro_precision, r.macro_recall, r.macro_f1);
  out += buf;
  out += "class                 precision    recall        f1\n";
  for (int k = 0; k < r.classes; ++k) {
    const std::string name = k < labels.size() ? labels.name(k) : ("class" + std::to_string(k));
    std::snprintf(buf, sizeof(buf), "%-20s  %9.6f %9.6f %9.6f\n", name.c_str(), r.precision[k],
                  r.recall[k], r.f1[k]);
    out += buf;
  }
  return out;
}

/// Raw confusion counts as CSV: header row/column of label names,
/// rows = truth, columns = prediction.
inline std::string confusion_csv(const EvalReport& r, const LabelMap& labels) {
  std::string out = "truth\\pred";
  for (int j = 0; j < r.classes; ++j)
    out += "," + (j < labels.size() ? labels.name(j) : "class" + std::to_string(j));
  out += "\n";
  for (int k = 0; k < r.classes; ++k) {
    out += k < labels.size() ? labels.name(k) : "class" + std::to_string(k);
    for (int j = 0; j < r.classes; ++j) out += "," + std::to_string(r.confusion(k, j));
    out += "\n";
  }
  return out;
}

}  // namespace hyxnet
