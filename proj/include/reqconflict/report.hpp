#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "reqconflict/eval.hpp"
#include "reqconflict/threshold.hpp"

namespace reqconflict {

struct FoldReport {
  double delta = 0.0;
  std::vector<RocPoint> roc;
  ConfusionMatrix phase1;
  std::map<std::string, ConfusionMatrix> phase2;  // keyed by NER backend label
};

struct RunReport {
  std::vector<std::pair<std::string, std::string>> metadata;  // printed in order
  std::vector<FoldReport> folds;
  std::vector<std::string> backends;  // phase2 backends, in run order

  MetricSummary phase1_summary() const;
  MetricSummary phase2_summary(const std::string& backend) const;
};

/// `key = value` lines covering metadata, per-fold cutoffs and metrics, and
/// aggregates as mean/std.
std::string summary_text(const RunReport& report);

/// Markdown table in the layout of the usual results tables.
std::string report_markdown(const RunReport& report);

/// Writes summary.txt, report.md and folds/<i>/{roc.csv, confusion.csv,
/// confusion_phase2_<backend>.csv} under `dir`.
void render_report(const RunReport& report, const std::filesystem::path& dir);

/// Filesystem-safe form of a backend label ("crf:models/x.crf" -> "crf_x").
std::string backend_slug(const std::string& backend);

}  // namespace reqconflict
