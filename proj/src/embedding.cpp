#include "reqconflict/embedding.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "reqconflict/error.hpp"

namespace reqconflict {

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw validation_error("embedding vector must have dim > 0");
  for (double v : values_) {
    if (!std::isfinite(v)) throw validation_error("embedding vector contains a non-finite entry");
  }
}

double EmbeddingVector::norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

EmbeddingVector EmbeddingVector::normalized() const {
  double n = norm();
  if (n == 0.0) throw validation_error("cannot normalise a zero vector");
  auto out = values_;
  for (auto& v : out) v /= n;
  return EmbeddingVector(std::move(out));
}

void EmbeddingTable::add(std::string id, EmbeddingVector v) {
  if (ids_.empty()) {
    dim_ = v.dim();
  } else if (v.dim() != dim_) {
    throw validation_error("inconsistent embedding dimension for id " + id + ": " + std::to_string(v.dim()) +
                           " vs " + std::to_string(dim_));
  }
  if (!index_.emplace(id, ids_.size()).second) throw validation_error("duplicate embedding id " + id);
  ids_.push_back(std::move(id));
  vectors_.push_back(std::move(v));
}

const EmbeddingVector& EmbeddingTable::at(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw validation_error("no embedding for id " + std::string(id));
  return vectors_[it->second];
}

EmbeddingTable EmbeddingTable::aligned_to(const RequirementSet& set) const {
  EmbeddingTable out(source_);
  for (const auto& r : set.requirements()) {
    auto it = index_.find(r.id);
    if (it == index_.end()) throw validation_error("embedding table (" + source_ + ") has no vector for id " + r.id);
    const auto& v = vectors_[it->second];
    if (v.norm() == 0.0) throw validation_error("zero embedding vector for id " + r.id);
    out.add(r.id, v.normalized());
  }
  if (out.size() != size()) {
    for (const auto& id : ids_) {
      if (!set.index_of(id)) throw validation_error("embedding id " + id + " is not in the requirement set");
    }
  }
  return out;
}

Eigen::MatrixXd EmbeddingTable::as_matrix() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < size(); ++i) {
    const auto& v = vectors_[i].values();
    for (std::size_t j = 0; j < dim_; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j];
  }
  return m;
}

// ---------------------------------------------------------------------------

TfidfModel TfidfModel::fit(const std::vector<std::string>& documents) {
  if (documents.empty()) throw validation_error("cannot fit TF-IDF on an empty corpus");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : documents) {
    std::set<std::string> seen;
    for (auto& t : tokenize(doc)) seen.insert(std::move(t.surface));
    for (const auto& t : seen) ++df[t];
  }
  if (df.empty()) throw validation_error("cannot fit TF-IDF: every document is empty");

  TfidfModel m;
  m.n_docs_ = documents.size();
  const double n = static_cast<double>(m.n_docs_);
  for (const auto& [term, count] : df) {
    m.vocabulary_.emplace(term, m.terms_.size());
    m.terms_.push_back(term);
    m.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return m;
}

TfidfModel TfidfModel::fit(const RequirementSet& corpus) {
  std::vector<std::string> docs;
  for (const auto& r : corpus.requirements()) docs.push_back(r.text);
  return fit(docs);
}

TfidfModel TfidfModel::fit(const RequirementSet& corpus, const std::vector<std::string>& ids) {
  std::vector<std::string> docs;
  for (const auto& id : ids) docs.push_back(corpus.at(id).text);
  return fit(docs);
}

std::optional<std::size_t> TfidfModel::index_of(std::string_view term) const {
  auto it = vocabulary_.find(term);
  if (it == vocabulary_.end()) return std::nullopt;
  return it->second;
}

double TfidfModel::idf(std::string_view term) const {
  auto idx = index_of(term);
  if (!idx) throw validation_error("term '" + std::string(term) + "' is not in the TF-IDF vocabulary");
  return idf_[*idx];
}

EmbeddingVector TfidfModel::embed(std::string_view text) const {
  std::vector<double> values(terms_.size(), 0.0);
  bool any = false;
  for (const auto& tok : tokenize(text)) {
    if (auto idx = index_of(tok.surface)) {
      values[*idx] += idf_[*idx];
      any = true;
    }
  }
  if (!any) throw validation_error("text has no in-vocabulary tokens: \"" + std::string(text) + "\"");
  return EmbeddingVector(std::move(values)).normalized();
}

EmbeddingTable TfidfModel::embed_all(const RequirementSet& set) const {
  EmbeddingTable table("tfidf");
  for (const auto& r : set.requirements()) {
    try {
      table.add(r.id, embed(r.text));
    } catch (const Error& e) {
      throw validation_error("requirement " + r.id + ": " + e.what());
    }
  }
  return table;
}

// ---------------------------------------------------------------------------

EmbeddingTable load_external_embeddings(std::string_view ndjson) {
  EmbeddingTable table;
  std::string model;
  std::size_t line_no = 0;
  for (auto& raw : split(ndjson, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty()) continue;
    auto where = "embedding file line " + std::to_string(line_no) + ": ";
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      // Python's json module writes NaN/Infinity as bare tokens, which are not JSON.
      if (line.find("NaN") != std::string_view::npos || line.find("Infinity") != std::string_view::npos) {
        throw validation_error(where + "vector entry is not a finite number");
      }
      throw validation_error(where + "invalid JSON (" + e.what() + ")");
    }
    if (!rec.is_object() || !rec.contains("id") || !rec.contains("model") || !rec.contains("vector")) {
      throw validation_error(where + "expected an object with id, model and vector");
    }
    std::string id;
    if (rec["id"].is_string()) id = rec["id"].get<std::string>();
    else if (rec["id"].is_number_integer()) id = std::to_string(rec["id"].get<long long>());
    else throw validation_error(where + "id must be a string");
    if (!rec["model"].is_string() || rec["model"].get<std::string>().empty()) {
      throw validation_error(where + "model must be a non-empty string");
    }
    auto this_model = rec["model"].get<std::string>();
    if (model.empty()) {
      model = this_model;
      table = EmbeddingTable("external:" + model);
    } else if (this_model != model) {
      throw validation_error(where + "model '" + this_model + "' differs from '" + model + "'");
    }
    if (!rec["vector"].is_array() || rec["vector"].empty()) {
      throw validation_error(where + "vector must be a non-empty array");
    }
    std::vector<double> values;
    values.reserve(rec["vector"].size());
    for (const auto& x : rec["vector"]) {
      if (!x.is_number()) throw validation_error(where + "vector entry is not a finite number");
      double v = x.get<double>();
      if (!std::isfinite(v)) throw validation_error(where + "vector entry is not a finite number");
      values.push_back(v);
    }
    try {
      table.add(id, EmbeddingVector(std::move(values)));
    } catch (const Error& e) {
      throw validation_error(where + e.what());
    }
  }
  return table;
}

EmbeddingTable load_external_embeddings_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw runtime_error("cannot read embedding file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_external_embeddings(buf.str());
}

std::string write_external_embeddings(const EmbeddingTable& table, std::string_view model) {
  std::string out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    nlohmann::json rec;
    rec["id"] = table.ids()[i];
    rec["model"] = std::string(model);
    rec["vector"] = table.vectors()[i].values();
    out += rec.dump() + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd IdentityReducer::reduce(const Eigen::MatrixXd& rows, std::size_t target_dim, std::uint64_t) const {
  if (static_cast<Eigen::Index>(target_dim) != rows.cols()) {
    throw config_error("identity reducer needs target_dim == input dim (" + std::to_string(rows.cols()) + ")");
  }
  return rows;
}

Eigen::MatrixXd PcaReducer::reduce(const Eigen::MatrixXd& rows, std::size_t target_dim, std::uint64_t) const {
  const auto n = rows.rows();
  const auto d = rows.cols();
  const auto k = static_cast<Eigen::Index>(target_dim);
  if (k == 0 || k > std::min(n, d)) {
    throw config_error("target_dim " + std::to_string(target_dim) + " must be in [1, min(n=" + std::to_string(n) +
                       ", dim=" + std::to_string(d) + ")]");
  }
  Eigen::MatrixXd centered = rows.rowwise() - rows.colwise().mean();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  Eigen::MatrixXd components = svd.matrixV().leftCols(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index arg = 0;
    components.col(c).cwiseAbs().maxCoeff(&arg);
    if (components(arg, c) < 0) components.col(c) *= -1.0;
  }
  return centered * components;
}

EmbeddingTable fuse(const EmbeddingTable& a, const EmbeddingTable& b, std::size_t target_dim, std::uint64_t seed,
                    const Reducer& reducer) {
  if (a.empty()) throw validation_error("cannot fuse empty embedding tables");
  if (a.size() != b.size()) throw validation_error("fused tables must cover identical ids");
  for (const auto& id : a.ids()) {
    if (!b.contains(id)) throw validation_error("id " + id + " is missing from " + b.source());
  }
  const auto da = a.dim(), db = b.dim();
  if (target_dim == 0 || target_dim > da + db) {
    throw config_error("target_dim " + std::to_string(target_dim) + " must be in [1, " + std::to_string(da + db) + "]");
  }

  Eigen::MatrixXd joined(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(da + db));
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto va = a.vectors()[i].normalized().values();
    auto vb = b.at(a.ids()[i]).normalized().values();
    auto row = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < da; ++j) joined(row, static_cast<Eigen::Index>(j)) = va[j];
    for (std::size_t j = 0; j < db; ++j) joined(row, static_cast<Eigen::Index>(da + j)) = vb[j];
  }

  Eigen::MatrixXd reduced = reducer.reduce(joined, target_dim, seed);
  EmbeddingTable out("fused");
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto row = reduced.row(static_cast<Eigen::Index>(i));
    std::vector<double> values(static_cast<std::size_t>(row.size()));
    for (Eigen::Index j = 0; j < row.size(); ++j) values[static_cast<std::size_t>(j)] = row(j);
    EmbeddingVector v(std::move(values));
    if (v.norm() == 0.0) throw validation_error("fused vector for id " + a.ids()[i] + " collapsed to zero");
    out.add(a.ids()[i], v.normalized());
  }
  return out;
}

}  // namespace reqconflict
