#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reqconflict/corpus.hpp"
#include "reqconflict/similarity.hpp"

namespace reqconflict {

using Labels = std::map<std::string, bool>;

enum class Objective {
  Youden,   // TPR - FPR
  Literal,  // TPR - (1 - FPR), kept for comparison with the printed formula
};

enum class SimilarityScope {
  Global,  // max similarity over every other requirement
  Fold,    // max similarity only within the same split
};

struct RocPoint {
  double k = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

struct CutoffSelection {
  double delta = 0.0;
  double objective = 0.0;
  std::vector<double> grid;
  std::vector<RocPoint> points;
};

struct CandidateConflictSet {
  double delta = 0.0;
  std::vector<std::string> members;        // in evaluation order
  std::map<std::string, Neighbor> evidence;  // similarity >= delta for every member

  bool contains(const std::string& id) const { return evidence.count(id) > 0; }
};

/// {0.01, 0.02, ..., 1.00}
std::vector<double> threshold_grid();

/// id -> (max similarity to another requirement >= k). With a pool, the
/// maximum is taken only over pool members.
Labels predict_labels(const SimilarityMatrix& m, std::span<const std::string> ids, double k);
Labels predict_labels(const SimilarityMatrix& m, std::span<const std::string> ids, double k,
                      std::span<const std::string> pool);

/// Conflict is the positive class. Needs at least one positive and one
/// negative in `gold`.
std::vector<RocPoint> roc_points(const SimilarityMatrix& m, const Labels& gold, std::span<const double> grid,
                                 std::optional<std::span<const std::string>> pool = std::nullopt);

double objective_value(const RocPoint& p, Objective objective);

/// Argmax of the objective; ties go to the smallest k.
CutoffSelection select_cutoff(std::span<const RocPoint> points, Objective objective = Objective::Youden);

std::string roc_csv(std::span<const RocPoint> points);

struct Phase1Options {
  Objective objective = Objective::Youden;
  SimilarityScope scope = SimilarityScope::Global;
};

struct Phase1Result {
  CutoffSelection selection;
  CandidateConflictSet candidates;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  Labels predicted;  // over test_ids
};

/// Learns delta on the training folds and labels the test fold with it.
Phase1Result phase1_detect(const RequirementSet& set, const SimilarityMatrix& m, const FoldAssignment& folds,
                           std::size_t test_fold, const Phase1Options& options = {});

}  // namespace reqconflict
