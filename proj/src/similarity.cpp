#include "reqconflict/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "reqconflict/error.hpp"

namespace reqconflict {

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw validation_error("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                           std::to_string(v.size()) + ")");
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw validation_error("cosine: zero vector");
  double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  constexpr double kSnap = 1e-12;
  if (c > 1.0 - kSnap) return 1.0;
  if (c < -1.0 + kSnap) return -1.0;
  return c;
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) { return cosine(u.values(), v.values()); }

SimilarityMatrix::SimilarityMatrix(std::vector<std::string> ids, std::vector<double> values)
    : ids_(std::move(ids)), values_(std::move(values)) {
  if (values_.size() != ids_.size() * ids_.size()) throw validation_error("similarity matrix is not square");
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) throw validation_error("duplicate id in similarity matrix: " + ids_[i]);
  }
}

std::size_t SimilarityMatrix::index_of(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw validation_error("unknown requirement id " + std::string(id));
  return it->second;
}

bool SimilarityMatrix::contains(std::string_view id) const { return index_.find(id) != index_.end(); }

double SimilarityMatrix::at(std::string_view a, std::string_view b) const {
  return (*this)(index_of(a), index_of(b));
}

Neighbor SimilarityMatrix::max_similarity(std::string_view id) const {
  auto i = index_of(id);
  if (size() < 2) throw validation_error("max_similarity needs at least two requirements");
  std::size_t best = i == 0 ? 1 : 0;
  for (std::size_t j = 0; j < size(); ++j) {
    if (j != i && (*this)(i, j) > (*this)(i, best)) best = j;
  }
  return {ids_[best], (*this)(i, best)};
}

Neighbor SimilarityMatrix::max_similarity(std::string_view id, std::span<const std::string> pool) const {
  auto i = index_of(id);
  std::vector<std::size_t> candidates;
  for (const auto& p : pool) {
    auto j = index_of(p);
    if (j != i) candidates.push_back(j);
  }
  if (candidates.empty()) throw validation_error("no other requirement to compare " + std::string(id) + " with");
  std::sort(candidates.begin(), candidates.end());
  std::size_t best = candidates.front();
  for (auto j : candidates) {
    if ((*this)(i, j) > (*this)(i, best)) best = j;
  }
  return {ids_[best], (*this)(i, best)};
}

std::vector<Neighbor> SimilarityMatrix::top_m(std::string_view id, std::size_t count) const {
  if (count == 0) throw validation_error("top_m needs m_count >= 1");
  auto i = index_of(id);
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < size(); ++j) {
    if (j != i) order.push_back(j);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return (*this)(i, a) > (*this)(i, b); });
  if (order.size() > count) order.resize(count);
  std::vector<Neighbor> out;
  for (auto j : order) out.push_back({ids_[j], (*this)(i, j)});
  return out;
}

std::string SimilarityMatrix::to_csv() const {
  std::string out = "id";
  for (const auto& id : ids_) out += "," + id;
  out += '\n';
  for (std::size_t i = 0; i < size(); ++i) {
    out += ids_[i];
    for (std::size_t j = 0; j < size(); ++j) out += "," + format_fixed((*this)(i, j), 6);
    out += '\n';
  }
  return out;
}

SimilarityMatrix pairwise_matrix(const EmbeddingTable& table) {
  if (table.empty()) throw validation_error("pairwise_matrix needs a non-empty table");
  const auto n = table.size();
  std::vector<double> values(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i * n + i] = cosine(table.vectors()[i], table.vectors()[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      double c = cosine(table.vectors()[i], table.vectors()[j]);
      values[i * n + j] = c;
      values[j * n + i] = c;
    }
  }
  return SimilarityMatrix(table.ids(), std::move(values));
}

}  // namespace reqconflict
