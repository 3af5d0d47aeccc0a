#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reqconflict/threshold.hpp"

namespace reqconflict {

/// Conflict is the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(const Labels& predicted, const Labels& gold);

struct Stat {
  double mean = 0.0;
  double std = 0.0;
};

struct ClassRates {
  Stat precision, recall, f1;
};

struct MetricSummary {
  ClassRates conflict;
  ClassRates no_conflict;
  ClassRates macro;  // unweighted mean of the two classes
  Stat support;      // gold conflicts
  std::size_t folds = 1;
  std::vector<std::string> notes;  // rates that were undefined and set to 0
};

/// Per-class precision/recall/F1 with 0 for undefined ratios (annotated in
/// notes), macro averages, single-fold std = 0.
MetricSummary macro_metrics(const ConfusionMatrix& cm);

/// Mean and population standard deviation of each metric across folds.
MetricSummary aggregate_folds(const std::vector<MetricSummary>& folds);

/// Row-normalised 2x2 matrix, header `,pred_conflict,pred_no_conflict`.
/// A row with no gold members prints `undefined` cells.
std::string confusion_csv(const ConfusionMatrix& cm);

/// "↑ 0.04 / 9.30%" style change between two F1 values: absolute difference
/// and percentage relative to `before`, rounded only for display.
std::string format_delta(double before, double after);

std::string format_stat(const Stat& s);  // "0.90 ± 0.04"

}  // namespace reqconflict
