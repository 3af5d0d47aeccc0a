#include "reqconflict/threshold.hpp"

#include <algorithm>

#include "reqconflict/error.hpp"

namespace reqconflict {
namespace {

std::vector<Neighbor> best_matches(const SimilarityMatrix& m, std::span<const std::string> ids,
                                   std::optional<std::span<const std::string>> pool) {
  std::vector<Neighbor> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(pool ? m.max_similarity(id, *pool) : m.max_similarity(id));
  return out;
}

}  // namespace

std::vector<double> threshold_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 100; ++i) grid.push_back(i / 100.0);
  return grid;
}

Labels predict_labels(const SimilarityMatrix& m, std::span<const std::string> ids, double k) {
  Labels out;
  for (const auto& id : ids) out[id] = m.max_similarity(id).similarity >= k;
  return out;
}

Labels predict_labels(const SimilarityMatrix& m, std::span<const std::string> ids, double k,
                      std::span<const std::string> pool) {
  Labels out;
  for (const auto& id : ids) out[id] = m.max_similarity(id, pool).similarity >= k;
  return out;
}

std::vector<RocPoint> roc_points(const SimilarityMatrix& m, const Labels& gold, std::span<const double> grid,
                                 std::optional<std::span<const std::string>> pool) {
  std::vector<std::string> ids;
  std::size_t positives = 0;
  for (const auto& [id, g] : gold) {
    ids.push_back(id);
    positives += g ? 1 : 0;
  }
  const std::size_t negatives = ids.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw validation_error("ROC needs both conflict and non-conflict requirements (positives=" +
                           std::to_string(positives) + ", negatives=" + std::to_string(negatives) + ")");
  }
  auto best = best_matches(m, ids, pool);

  std::vector<double> ks(grid.begin(), grid.end());
  std::sort(ks.begin(), ks.end());
  std::vector<RocPoint> points;
  for (double k : ks) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (best[i].similarity >= k) (gold.at(ids[i]) ? tp : fp) += 1;
    }
    points.push_back({k, static_cast<double>(tp) / static_cast<double>(positives),
                      static_cast<double>(fp) / static_cast<double>(negatives)});
  }
  return points;
}

double objective_value(const RocPoint& p, Objective objective) {
  switch (objective) {
    case Objective::Youden:
      return p.tpr - p.fpr;
    case Objective::Literal:
      return p.tpr - (1.0 - p.fpr);
  }
  return 0.0;
}

CutoffSelection select_cutoff(std::span<const RocPoint> points, Objective objective) {
  if (points.empty()) throw validation_error("select_cutoff needs at least one ROC point");
  CutoffSelection sel;
  sel.points.assign(points.begin(), points.end());
  std::stable_sort(sel.points.begin(), sel.points.end(), [](const auto& a, const auto& b) { return a.k < b.k; });
  for (const auto& p : sel.points) sel.grid.push_back(p.k);
  const RocPoint* best = &sel.points.front();
  for (const auto& p : sel.points) {
    if (objective_value(p, objective) > objective_value(*best, objective)) best = &p;
  }
  sel.delta = best->k;
  sel.objective = objective_value(*best, objective);
  return sel;
}

std::string roc_csv(std::span<const RocPoint> points) {
  std::string out = "k,tpr,fpr\n";
  for (const auto& p : points) {
    out += format_fixed(p.k, 2) + "," + format_fixed(p.tpr, 6) + "," + format_fixed(p.fpr, 6) + "\n";
  }
  return out;
}

Phase1Result phase1_detect(const RequirementSet& set, const SimilarityMatrix& m, const FoldAssignment& folds,
                           std::size_t test_fold, const Phase1Options& options) {
  if (test_fold >= folds.n_folds) throw validation_error("test fold " + std::to_string(test_fold) + " out of range");
  for (const auto& r : set.requirements()) {
    if (!folds.assignment.count(r.id)) throw validation_error("fold assignment misses id " + r.id);
  }
  Phase1Result result;
  result.train_ids = folds.ids_outside(test_fold, set);
  result.test_ids = folds.ids_in(test_fold, set);

  Labels train_gold;
  for (const auto& id : result.train_ids) train_gold[id] = set.at(id).gold_conflict;
  const bool fold_scope = options.scope == SimilarityScope::Fold;

  std::vector<RocPoint> points;
  try {
    auto grid = threshold_grid();
    points = fold_scope ? roc_points(m, train_gold, grid, std::span<const std::string>(result.train_ids))
                        : roc_points(m, train_gold, grid);
  } catch (const Error& e) {
    throw validation_error("fold " + std::to_string(test_fold) + " training split: " + e.what());
  }
  result.selection = select_cutoff(points, options.objective);

  auto& cands = result.candidates;
  cands.delta = result.selection.delta;
  for (const auto& id : result.test_ids) {
    if (fold_scope && result.test_ids.size() < 2) {  // nothing in the fold to match against
      result.predicted[id] = false;
      continue;
    }
    auto best = fold_scope ? m.max_similarity(id, result.test_ids) : m.max_similarity(id);
    bool conflict = best.similarity >= cands.delta;
    result.predicted[id] = conflict;
    if (conflict) {
      cands.members.push_back(id);
      cands.evidence.emplace(id, best);
    }
  }
  return result;
}

}  // namespace reqconflict
