#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "reqconflict/corpus.hpp"
#include "reqconflict/text.hpp"

namespace reqconflict {

/// Finite, non-empty vector of reals.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  std::size_t dim() const { return values_.size(); }
  double norm() const;
  EmbeddingVector normalized() const;  // throws on a zero vector

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
};

/// Vectors keyed by requirement id, kept in insertion order. All vectors
/// share one dimension.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::string source) : source_(std::move(source)) {}

  void add(std::string id, EmbeddingVector v);

  const std::string& source() const { return source_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<EmbeddingVector>& vectors() const { return vectors_; }
  const EmbeddingVector& at(std::string_view id) const;
  bool contains(std::string_view id) const { return index_.count(std::string(id)) > 0; }

  /// Reorders to `set` order; every set id must be present and no extra ids
  /// are allowed. Rows are L2-normalised.
  EmbeddingTable aligned_to(const RequirementSet& set) const;

  Eigen::MatrixXd as_matrix() const;  // one row per id

  friend bool operator==(const EmbeddingTable& a, const EmbeddingTable& b) {
    return a.source_ == b.source_ && a.ids_ == b.ids_ && a.vectors_ == b.vectors_;
  }

 private:
  std::string source_;
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<EmbeddingVector> vectors_;
  std::map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// TF-IDF

class TfidfModel {
 public:
  /// idf(t) = ln((1 + N) / (1 + df(t))) + 1, vocabulary in lexicographic order.
  static TfidfModel fit(const std::vector<std::string>& documents);
  static TfidfModel fit(const RequirementSet& corpus);
  static TfidfModel fit(const RequirementSet& corpus, const std::vector<std::string>& ids);

  std::size_t n_docs() const { return n_docs_; }
  std::size_t vocabulary_size() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<double>& idf() const { return idf_; }
  std::optional<std::size_t> index_of(std::string_view term) const;
  double idf(std::string_view term) const;  // throws for out-of-vocabulary terms

  /// Raw count x idf, L2-normalised. Throws if no token is in the vocabulary.
  EmbeddingVector embed(std::string_view text) const;
  EmbeddingTable embed_all(const RequirementSet& set) const;

  friend bool operator==(const TfidfModel&, const TfidfModel&) = default;

 private:
  std::size_t n_docs_ = 0;
  std::vector<std::string> terms_;
  std::vector<double> idf_;
  std::map<std::string, std::size_t, std::less<>> vocabulary_;
};

// ---------------------------------------------------------------------------
// External vectors: one JSON object per line {"id", "model", "vector"}.

EmbeddingTable load_external_embeddings(std::string_view ndjson);
EmbeddingTable load_external_embeddings_file(const std::string& path);
std::string write_external_embeddings(const EmbeddingTable& table, std::string_view model);

// ---------------------------------------------------------------------------
// Fusion

class Reducer {
 public:
  virtual ~Reducer() = default;
  virtual std::string name() const = 0;
  /// Maps n x d rows to n x target_dim.
  virtual Eigen::MatrixXd reduce(const Eigen::MatrixXd& rows, std::size_t target_dim,
                                 std::uint64_t seed) const = 0;
};

/// Requires target_dim == input dim.
class IdentityReducer final : public Reducer {
 public:
  std::string name() const override { return "identity"; }
  Eigen::MatrixXd reduce(const Eigen::MatrixXd& rows, std::size_t target_dim, std::uint64_t seed) const override;
};

/// Centred principal-component projection from a thin SVD. Each component's
/// sign is fixed so its largest-magnitude loading is positive; the seed is
/// unused because the decomposition is deterministic.
class PcaReducer final : public Reducer {
 public:
  std::string name() const override { return "pca"; }
  Eigen::MatrixXd reduce(const Eigen::MatrixXd& rows, std::size_t target_dim, std::uint64_t seed) const override;
};

inline constexpr std::size_t kDefaultFusedDim = 256;

/// Per-id concatenation [a || b], reduced to target_dim, rows renormalised.
EmbeddingTable fuse(const EmbeddingTable& a, const EmbeddingTable& b, std::size_t target_dim,
                    std::uint64_t seed, const Reducer& reducer = PcaReducer{});

}  // namespace reqconflict
