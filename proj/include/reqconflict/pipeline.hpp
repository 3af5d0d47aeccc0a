#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reqconflict/corpus.hpp"
#include "reqconflict/crf.hpp"
#include "reqconflict/embedding.hpp"
#include "reqconflict/report.hpp"
#include "reqconflict/semantic.hpp"
#include "reqconflict/threshold.hpp"

namespace reqconflict {

enum class EmbeddingScheme { Tfidf, External, Fused };
enum class TfidfFit { Global, Fold };

/// Settings of one run. Text form is `key = value` per line with `#` comments.
struct RunConfig {
  std::string dataset;
  EmbeddingScheme embedding = EmbeddingScheme::Tfidf;
  std::string external_embeddings;
  std::size_t target_dim = kDefaultFusedDim;
  std::size_t n_folds = 3;
  std::uint64_t seed = 42;
  std::vector<std::string> ner = {"general"};  // general | crf:<model> | file:<annotated corpus>
  std::size_t m_count = 5;
  double t_o = 1.0;
  Objective objective = Objective::Youden;
  SimilarityScope similarity_scope = SimilarityScope::Global;
  TfidfFit tfidf_fit = TfidfFit::Global;
  std::string output;
  bool dump_matrix = false;

  /// Throws a config Error for unknown keys and unparsable values.
  void set(const std::string& key, const std::string& value);
  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::string& path);
  std::string snapshot() const;

  /// Range and consistency checks; with `check_paths`, input files must exist.
  void validate(bool check_paths = true) const;

  /// `output` if set, else $REQCONFLICT_OUTPUT_ROOT (default "runs") / dataset stem.
  std::filesystem::path output_dir() const;
};

std::string to_string(EmbeddingScheme scheme);

/// Embedding table for `set` under the configured scheme. `fit_ids` restricts
/// the TFIDF vocabulary and idf statistics (fold-local fitting).
EmbeddingTable build_embeddings(const RunConfig& config, const RequirementSet& set,
                                const std::vector<std::string>* fit_ids = nullptr);

std::unique_ptr<EntityTagger> make_tagger(const std::string& backend);

struct Phase1Run {
  RequirementSet set;
  FoldAssignment folds;
  std::vector<Phase1Result> results;
  RunReport report;
};

/// Runs Phase I on every fold and writes the run directory. Returns what it
/// wrote so callers can inspect it.
Phase1Run cmd_phase1(const RunConfig& config);

struct Phase2Run {
  Phase1Run phase1;
  // backend -> per-fold final set
  std::map<std::string, std::vector<FinalConflictSet>> finals;
};

/// Reads config.snapshot, folds.csv and the candidate sets from `run_dir`,
/// applies `overrides` (ner, m_count, t_o), filters and rewrites the reports.
Phase2Run cmd_phase2(const std::filesystem::path& run_dir, const std::map<std::string, std::string>& overrides = {});

/// Diagnostics, one per line; true iff clean.
bool cmd_validate(const std::string& path, std::ostream& out);

struct TrainNerOptions {
  std::string corpus;
  std::string model_out;
  std::string metrics_out;  // default: <model_out>.metrics.md
  std::vector<double> c1 = {0.1};
  std::vector<double> c2 = {0.1};
  std::size_t max_iterations = 100;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
};

struct GridRun {
  CrfHyperparams hyperparams;
  NerEvaluation evaluation;
};

struct TrainNerResult {
  std::vector<GridRun> grid;  // c1-major order
  std::size_t best = 0;
  CrfTraining training;
  std::string metrics;  // text written to metrics_out
};

TrainNerResult cmd_train_ner(const TrainNerOptions& options);

/// Each path is a run directory or a directory of run directories. One run
/// yields its report.md verbatim; more yield one comparative table.
std::string cmd_report(const std::vector<std::filesystem::path>& paths);

void cmd_synth(const std::string& input, const std::string& output, const SynthOptions& options);

/// Parses a summary.txt into ordered key/value pairs; a bad line names the file.
std::vector<std::pair<std::string, std::string>> parse_summary(std::string_view text, const std::string& origin);

}  // namespace reqconflict
