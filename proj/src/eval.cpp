#include "reqconflict/eval.hpp"

#include <cmath>

#include "reqconflict/error.hpp"
#include "reqconflict/text.hpp"

namespace reqconflict {

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

ConfusionMatrix confusion(const Labels& predicted, const Labels& gold) {
  if (predicted.size() != gold.size()) throw validation_error("prediction and gold label domains differ in size");
  ConfusionMatrix cm;
  for (const auto& [id, g] : gold) {
    auto it = predicted.find(id);
    if (it == predicted.end()) throw validation_error("no prediction for id " + id);
    bool p = it->second;
    if (p && g) ++cm.tp;
    else if (p && !g) ++cm.fp;
    else if (!p && g) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

namespace {

double ratio(std::size_t num, std::size_t den, const std::string& what, std::vector<std::string>& notes) {
  if (den == 0) {
    notes.push_back(what + " undefined (0/0), reported as 0");
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

double f1_of(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

}  // namespace

MetricSummary macro_metrics(const ConfusionMatrix& cm) {
  MetricSummary m;
  auto& notes = m.notes;
  double pc = ratio(cm.tp, cm.tp + cm.fp, "conflict precision", notes);
  double rc = ratio(cm.tp, cm.tp + cm.fn, "conflict recall", notes);
  double pn = ratio(cm.tn, cm.tn + cm.fn, "no-conflict precision", notes);
  double rn = ratio(cm.tn, cm.tn + cm.fp, "no-conflict recall", notes);
  m.conflict = {{pc, 0}, {rc, 0}, {f1_of(pc, rc), 0}};
  m.no_conflict = {{pn, 0}, {rn, 0}, {f1_of(pn, rn), 0}};
  m.macro = {{(pc + pn) / 2, 0}, {(rc + rn) / 2, 0}, {(m.conflict.f1.mean + m.no_conflict.f1.mean) / 2, 0}};
  m.support = {static_cast<double>(cm.tp + cm.fn), 0};
  return m;
}

MetricSummary aggregate_folds(const std::vector<MetricSummary>& folds) {
  if (folds.empty()) throw validation_error("aggregate_folds needs at least one fold");
  const auto n = static_cast<double>(folds.size());
  auto stat = [&](auto get) {
    double mean = 0;
    for (const auto& f : folds) mean += get(f).mean;
    mean /= n;
    double var = 0;
    for (const auto& f : folds) var += (get(f).mean - mean) * (get(f).mean - mean);
    return Stat{mean, std::sqrt(var / n)};
  };
  auto rates = [&](auto get_class) {
    return ClassRates{stat([&](const MetricSummary& f) { return get_class(f).precision; }),
                      stat([&](const MetricSummary& f) { return get_class(f).recall; }),
                      stat([&](const MetricSummary& f) { return get_class(f).f1; })};
  };
  MetricSummary out;
  out.conflict = rates([](const MetricSummary& f) -> const ClassRates& { return f.conflict; });
  out.no_conflict = rates([](const MetricSummary& f) -> const ClassRates& { return f.no_conflict; });
  out.macro = rates([](const MetricSummary& f) -> const ClassRates& { return f.macro; });
  out.support = stat([](const MetricSummary& f) { return f.support; });
  out.folds = folds.size();
  for (std::size_t i = 0; i < folds.size(); ++i) {
    for (const auto& note : folds[i].notes) out.notes.push_back("fold " + std::to_string(i) + ": " + note);
  }
  return out;
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  auto row = [](const char* name, std::size_t a, std::size_t b) {
    std::string out = name;
    auto total = a + b;
    if (total == 0) return out + ",undefined,undefined\n";
    return out + "," + format_fixed(static_cast<double>(a) / static_cast<double>(total), 6) + "," +
           format_fixed(static_cast<double>(b) / static_cast<double>(total), 6) + "\n";
  };
  return ",pred_conflict,pred_no_conflict\n" + row("conflict", cm.tp, cm.fn) + row("no_conflict", cm.fp, cm.tn);
}

std::string format_delta(double before, double after) {
  double diff = after - before;
  auto abs_text = format_fixed(std::abs(diff), 2);
  std::string arrow;
  if (abs_text != "0.00") arrow = diff > 0 ? "↑ " : "↓ ";
  std::string rel = before == 0.0 ? "n/a" : format_fixed(diff / before * 100.0, 2) + "%";
  return arrow + abs_text + " / " + rel;
}

std::string format_stat(const Stat& s) { return format_fixed(s.mean, 2) + " ± " + format_fixed(s.std, 2); }

}  // namespace reqconflict
