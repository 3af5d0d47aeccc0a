#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reqconflict/embedding.hpp"

namespace reqconflict {

/// dot(u, v) / (|u| |v|), clamped to [-1, 1]; values within 1e-12 of +/-1 are
/// snapped so equal directions compare exactly equal to 1.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);
double cosine(std::span<const double> u, std::span<const double> v);

struct Neighbor {
  std::string id;
  double similarity = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Square, symmetric matrix of pairwise cosine similarities in id order.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::vector<std::string> ids, std::vector<double> values);

  const std::vector<std::string>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * ids_.size() + j]; }
  double at(std::string_view a, std::string_view b) const;
  std::size_t index_of(std::string_view id) const;  // throws for unknown ids
  bool contains(std::string_view id) const;

  /// Most similar other id; ties go to the id that comes first in matrix
  /// order. `pool`, when given, restricts the candidates.
  Neighbor max_similarity(std::string_view id) const;
  Neighbor max_similarity(std::string_view id, std::span<const std::string> pool) const;

  /// Up to `count` most similar other ids, descending, ties by matrix order.
  std::vector<Neighbor> top_m(std::string_view id, std::size_t count) const;

  /// Header `id,<ids...>`, one row per id, six decimals.
  std::string to_csv() const;

 private:
  std::vector<std::string> ids_;
  std::vector<double> values_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

SimilarityMatrix pairwise_matrix(const EmbeddingTable& table);

}  // namespace reqconflict
