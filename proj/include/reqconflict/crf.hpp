#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reqconflict/ner.hpp"
#include "reqconflict/optimize.hpp"

namespace reqconflict {

struct CrfHyperparams {
  double c1 = 0.1;  // L1
  double c2 = 0.1;  // L2
  std::size_t max_iterations = 100;

  friend bool operator==(const CrfHyperparams&, const CrfHyperparams&) = default;
};

/// Per-position label scores plus a label-to-label transition table.
struct ScoreLattice {
  std::size_t length = 0;
  std::size_t labels = 0;
  std::vector<double> unary;       // length x labels
  std::vector<double> transition;  // labels x labels, [from * labels + to]

  double u(std::size_t t, std::size_t y) const { return unary[t * labels + y]; }
  double tr(std::size_t from, std::size_t to) const { return transition[from * labels + to]; }
};

double sequence_score(const ScoreLattice& lattice, std::span<const std::size_t> path);
double log_partition(const ScoreLattice& lattice);

/// Exact argmax path. On equal scores the smaller label index wins.
std::vector<std::size_t> viterbi(const ScoreLattice& lattice);

/// Linear-chain CRF over binary features. Weights are dense: one row of
/// |labels| state weights per attribute, then the transition table.
class CrfModel {
 public:
  CrfModel() = default;
  CrfModel(TagSet tagset, std::vector<std::string> attributes, std::vector<double> weights,
           CrfHyperparams hyperparams);

  const TagSet& tagset() const { return tagset_; }
  const CrfHyperparams& hyperparams() const { return hyperparams_; }
  const std::vector<std::string>& attributes() const { return attributes_; }
  const std::vector<double>& weights() const { return weights_; }

  std::optional<std::size_t> attribute_index(std::string_view feature) const;
  double state_weight(std::string_view feature, std::string_view label) const;
  double transition_weight(std::string_view from, std::string_view to) const;

  /// Features the model has not seen contribute nothing.
  ScoreLattice lattice(const std::vector<Token>& tokens) const;
  std::vector<std::string> decode(const std::vector<Token>& tokens) const;

  std::string save() const;
  static CrfModel load(std::string_view text);
  static CrfModel load_file(const std::string& path);

  friend bool operator==(const CrfModel& a, const CrfModel& b) {
    return a.tagset_ == b.tagset_ && a.attributes_ == b.attributes_ && a.weights_ == b.weights_ &&
           a.hyperparams_ == b.hyperparams_;
  }

 private:
  TagSet tagset_;
  std::vector<std::string> attributes_;
  std::map<std::string, std::size_t, std::less<>> attribute_index_;
  std::vector<double> weights_;
  CrfHyperparams hyperparams_;
};

/// Negative conditional log-likelihood plus c2 |w|^2 over a fixed corpus.
class CrfObjective {
 public:
  CrfObjective(const std::vector<AnnotatedSentence>& corpus, const TagSet& tagset, double c2);

  std::size_t dimension() const { return attributes_.size() * labels_ + labels_ * labels_; }
  const std::vector<std::string>& attributes() const { return attributes_; }
  double operator()(std::span<const double> w, std::span<double> grad) const;

 private:
  struct Item {
    std::vector<std::size_t> attrs;
    std::size_t label = 0;
  };
  std::size_t labels_ = 0;
  double c2_ = 0.0;
  std::vector<std::string> attributes_;
  std::vector<std::vector<Item>> sentences_;
};

struct CrfTraining {
  CrfModel model;
  optimize::Result optimizer;
};

/// Zero-initialised, deterministic for a fixed corpus order.
CrfTraining train_crf(const std::vector<AnnotatedSentence>& corpus, const TagSet& tagset,
                      const CrfHyperparams& hyperparams = {});

class CrfTagger final : public EntityTagger {
 public:
  explicit CrfTagger(CrfModel model) : model_(std::move(model)) {}
  std::string name() const override { return "crf"; }
  std::vector<EntitySpan> tag(std::string_view id, const std::vector<Token>& tokens) const override;
  const CrfModel& model() const { return model_; }

 private:
  CrfModel model_;
};

// ---------------------------------------------------------------------------
// Cross-validated token-level evaluation.

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct EntityScores {
  MeanStd precision, recall, f1, support;
  std::size_t folds = 0;  // folds in which the type had gold support
};

struct NerEvaluation {
  std::vector<std::pair<std::string, EntityScores>> per_type;  // tagset order
  EntityScores micro, macro, weighted;
  std::vector<std::string> warnings;
  double token_accuracy = 0.0;  // pooled over all folds

  std::string to_table() const;
};

struct NerFoldCounts {
  std::map<std::string, std::size_t> tp, predicted, gold;
  std::size_t tokens = 0, correct = 0;
};

/// Counts for token-level scoring of `predicted` against `gold` labels.
NerFoldCounts count_ner(const std::vector<std::vector<std::string>>& gold,
                        const std::vector<std::vector<std::string>>& predicted, const TagSet& tagset);

NerEvaluation evaluate_ner(const std::vector<AnnotatedSentence>& corpus, const TagSet& tagset,
                           const CrfHyperparams& hyperparams, std::size_t n_folds = 5, std::uint64_t seed = 0);

}  // namespace reqconflict
