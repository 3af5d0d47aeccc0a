#include "reqconflict/report.hpp"

#include <sstream>

#include "reqconflict/error.hpp"
#include "reqconflict/io.hpp"
#include "reqconflict/text.hpp"

namespace reqconflict {

MetricSummary RunReport::phase1_summary() const {
  std::vector<MetricSummary> per_fold;
  for (const auto& f : folds) per_fold.push_back(macro_metrics(f.phase1));
  return aggregate_folds(per_fold);
}

MetricSummary RunReport::phase2_summary(const std::string& backend) const {
  std::vector<MetricSummary> per_fold;
  for (const auto& f : folds) {
    auto it = f.phase2.find(backend);
    if (it == f.phase2.end()) throw validation_error("no phase2 results for backend " + backend);
    per_fold.push_back(macro_metrics(it->second));
  }
  return aggregate_folds(per_fold);
}

std::string backend_slug(const std::string& backend) {
  auto colon = backend.find(':');
  std::string kind = backend.substr(0, colon);
  if (colon == std::string::npos) return kind;
  std::string path = backend.substr(colon + 1);
  if (auto slash = path.find_last_of('/'); slash != std::string::npos) path = path.substr(slash + 1);
  if (auto dot = path.find_last_of('.'); dot != std::string::npos && dot > 0) path = path.substr(0, dot);
  std::string slug = kind + "_";
  for (char c : path) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    slug.push_back(ok ? c : '_');
  }
  return slug;
}

namespace {

void put_summary(std::ostringstream& out, const std::string& prefix, const MetricSummary& m) {
  auto put = [&](const std::string& key, const Stat& s) {
    out << prefix << key << ".mean = " << format_fixed(s.mean, 6) << '\n';
    out << prefix << key << ".std = " << format_fixed(s.std, 6) << '\n';
  };
  put("macro_f1", m.macro.f1);
  put("macro_precision", m.macro.precision);
  put("macro_recall", m.macro.recall);
  put("conflict_f1", m.conflict.f1);
  put("support", m.support);
}

void put_fold(std::ostringstream& out, const std::string& prefix, const ConfusionMatrix& cm) {
  auto m = macro_metrics(cm);
  out << prefix << "macro_f1 = " << format_fixed(m.macro.f1.mean, 6) << '\n';
  out << prefix << "macro_precision = " << format_fixed(m.macro.precision.mean, 6) << '\n';
  out << prefix << "macro_recall = " << format_fixed(m.macro.recall.mean, 6) << '\n';
  out << prefix << "confusion = " << cm.tp << ' ' << cm.fp << ' ' << cm.fn << ' ' << cm.tn << '\n';
  for (const auto& note : m.notes) out << prefix << "note = " << note << '\n';
}

}  // namespace

std::string summary_text(const RunReport& report) {
  std::ostringstream out;
  out << "# reqconflict run summary\n";
  for (const auto& [k, v] : report.metadata) out << k << " = " << v << '\n';
  out << "folds = " << report.folds.size() << '\n';
  if (!report.backends.empty()) {
    out << "phase2.backends = ";
    for (std::size_t i = 0; i < report.backends.size(); ++i) out << (i ? "," : "") << report.backends[i];
    out << '\n';
  }
  double delta_mean = 0;
  for (std::size_t i = 0; i < report.folds.size(); ++i) {
    const auto& f = report.folds[i];
    auto prefix = "fold." + std::to_string(i) + ".";
    out << prefix << "delta = " << format_fixed(f.delta, 2) << '\n';
    put_fold(out, prefix + "phase1.", f.phase1);
    for (const auto& b : report.backends) put_fold(out, prefix + "phase2." + b + ".", f.phase2.at(b));
    delta_mean += f.delta;
  }
  if (report.folds.empty()) return out.str();
  out << "delta.mean = " << format_fixed(delta_mean / static_cast<double>(report.folds.size()), 6) << '\n';
  auto p1 = report.phase1_summary();
  put_summary(out, "phase1.", p1);
  for (const auto& b : report.backends) {
    auto p2 = report.phase2_summary(b);
    put_summary(out, "phase2." + b + ".", p2);
    out << "phase2." << b << ".f1_change = " << format_delta(p1.macro.f1.mean, p2.macro.f1.mean) << '\n';
  }
  return out.str();
}

std::string report_markdown(const RunReport& report) {
  std::ostringstream out;
  std::string dataset, embedding;
  for (const auto& [k, v] : report.metadata) {
    if (k == "dataset") dataset = v;
    if (k == "embedding") embedding = v;
  }
  out << "# Conflict detection: " << dataset << "\n\n";
  for (const auto& [k, v] : report.metadata) out << "- " << k << ": " << v << '\n';
  if (report.folds.empty()) return out.str();

  auto p1 = report.phase1_summary();
  double delta_mean = 0;
  for (const auto& f : report.folds) delta_mean += f.delta;
  delta_mean /= static_cast<double>(report.folds.size());

  out << "\n## Phase I (similarity)\n\n";
  out << "| Dataset | Embeddings | Cosine cutoff | F1-score | Recall | Precision | Support |\n";
  out << "|---|---|---|---|---|---|---|\n";
  out << "| " << dataset << " | " << embedding << " | " << format_fixed(delta_mean, 2) << " | "
      << format_stat(p1.macro.f1) << " | " << format_stat(p1.macro.recall) << " | " << format_stat(p1.macro.precision)
      << " | " << format_fixed(p1.support.mean, 2) << " |\n";

  if (!report.backends.empty()) {
    out << "\n## Phase II (entity overlap)\n\n";
    out << "| Dataset | NER Method | F1-score | Change vs Phase I | Recall | Precision | Support |\n";
    out << "|---|---|---|---|---|---|---|\n";
    for (const auto& b : report.backends) {
      auto p2 = report.phase2_summary(b);
      out << "| " << dataset << " | " << b << " | " << format_stat(p2.macro.f1) << " | ("
          << format_delta(p1.macro.f1.mean, p2.macro.f1.mean) << ") | " << format_stat(p2.macro.recall) << " | "
          << format_stat(p2.macro.precision) << " | " << format_fixed(p2.support.mean, 2) << " |\n";
    }
  }

  out << "\n## Per fold\n\n| Fold | Cutoff | Phase I F1";
  for (const auto& b : report.backends) out << " | " << b << " F1";
  out << " |\n|---|---|---";
  for (std::size_t i = 0; i < report.backends.size(); ++i) out << "|---";
  out << "|\n";
  for (std::size_t i = 0; i < report.folds.size(); ++i) {
    const auto& f = report.folds[i];
    out << "| " << i << " | " << format_fixed(f.delta, 2) << " | "
        << format_fixed(macro_metrics(f.phase1).macro.f1.mean, 2);
    for (const auto& b : report.backends) out << " | " << format_fixed(macro_metrics(f.phase2.at(b)).macro.f1.mean, 2);
    out << " |\n";
  }

  std::vector<std::string> notes = p1.notes;
  for (const auto& b : report.backends) {
    for (const auto& n : report.phase2_summary(b).notes) notes.push_back(b + ": " + n);
  }
  if (!notes.empty()) {
    out << "\n## Undefined rates\n\n";
    for (const auto& n : notes) out << "- " << n << '\n';
  }
  return out.str();
}

void render_report(const RunReport& report, const std::filesystem::path& dir) {
  for (std::size_t i = 0; i < report.folds.size(); ++i) {
    const auto& f = report.folds[i];
    auto fold_dir = dir / "folds" / std::to_string(i);
    write_file_atomic(fold_dir / "roc.csv", roc_csv(f.roc));
    write_file_atomic(fold_dir / "confusion.csv", confusion_csv(f.phase1));
    for (const auto& b : report.backends) {
      write_file_atomic(fold_dir / ("confusion_phase2_" + backend_slug(b) + ".csv"), confusion_csv(f.phase2.at(b)));
    }
  }
  write_file_atomic(dir / "summary.txt", summary_text(report));
  write_file_atomic(dir / "report.md", report_markdown(report));
}

}  // namespace reqconflict
