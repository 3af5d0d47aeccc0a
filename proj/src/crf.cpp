#include "reqconflict/crf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "reqconflict/error.hpp"

namespace reqconflict {
namespace {

double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

void check_lattice(const ScoreLattice& l) {
  if (l.unary.size() != l.length * l.labels || l.transition.size() != l.labels * l.labels) {
    throw validation_error("malformed score lattice");
  }
}

}  // namespace

double sequence_score(const ScoreLattice& l, std::span<const std::size_t> path) {
  check_lattice(l);
  if (path.size() != l.length) throw validation_error("path length does not match lattice");
  double s = 0.0;
  for (std::size_t t = 0; t < path.size(); ++t) {
    s += l.u(t, path[t]);
    if (t > 0) s += l.tr(path[t - 1], path[t]);
  }
  return s;
}

double log_partition(const ScoreLattice& l) {
  check_lattice(l);
  if (l.length == 0) return 0.0;
  const auto L = l.labels;
  std::vector<double> alpha(L), next(L), buf(L);
  for (std::size_t y = 0; y < L; ++y) alpha[y] = l.u(0, y);
  for (std::size_t t = 1; t < l.length; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t p = 0; p < L; ++p) buf[p] = alpha[p] + l.tr(p, y);
      next[y] = log_sum_exp(buf) + l.u(t, y);
    }
    alpha.swap(next);
  }
  return log_sum_exp(alpha);
}

std::vector<std::size_t> viterbi(const ScoreLattice& l) {
  check_lattice(l);
  const auto T = l.length, L = l.labels;
  if (T == 0) return {};
  std::vector<double> score(T * L);
  std::vector<std::size_t> back(T * L, 0);
  for (std::size_t y = 0; y < L; ++y) score[y] = l.u(0, y);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      std::size_t best = 0;
      double best_score = score[(t - 1) * L] + l.tr(0, y);
      for (std::size_t p = 1; p < L; ++p) {
        double s = score[(t - 1) * L + p] + l.tr(p, y);
        if (s > best_score) {
          best_score = s;
          best = p;
        }
      }
      score[t * L + y] = best_score + l.u(t, y);
      back[t * L + y] = best;
    }
  }
  std::vector<std::size_t> path(T);
  std::size_t last = 0;
  for (std::size_t y = 1; y < L; ++y) {
    if (score[(T - 1) * L + y] > score[(T - 1) * L + last]) last = y;
  }
  path[T - 1] = last;
  for (std::size_t t = T - 1; t > 0; --t) path[t - 1] = back[t * L + path[t]];
  return path;
}

// ---------------------------------------------------------------------------

CrfModel::CrfModel(TagSet tagset, std::vector<std::string> attributes, std::vector<double> weights,
                   CrfHyperparams hyperparams)
    : tagset_(std::move(tagset)),
      attributes_(std::move(attributes)),
      weights_(std::move(weights)),
      hyperparams_(hyperparams) {
  const auto L = tagset_.size();
  if (weights_.size() != attributes_.size() * L + L * L) throw validation_error("CRF weight vector has wrong size");
  for (double w : weights_) {
    if (!std::isfinite(w)) throw validation_error("CRF weights must be finite");
  }
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (!attribute_index_.emplace(attributes_[i], i).second) {
      throw validation_error("duplicate CRF attribute " + attributes_[i]);
    }
  }
}

std::optional<std::size_t> CrfModel::attribute_index(std::string_view feature) const {
  auto it = attribute_index_.find(feature);
  if (it == attribute_index_.end()) return std::nullopt;
  return it->second;
}

double CrfModel::state_weight(std::string_view feature, std::string_view label) const {
  auto a = attribute_index(feature);
  auto y = tagset_.index_of(label);
  if (!a || !y) return 0.0;
  return weights_[*a * tagset_.size() + *y];
}

double CrfModel::transition_weight(std::string_view from, std::string_view to) const {
  auto f = tagset_.index_of(from);
  auto t = tagset_.index_of(to);
  if (!f || !t) throw validation_error("unknown label in transition lookup");
  const auto L = tagset_.size();
  return weights_[attributes_.size() * L + *f * L + *t];
}

ScoreLattice CrfModel::lattice(const std::vector<Token>& tokens) const {
  const auto L = tagset_.size();
  ScoreLattice l;
  l.length = tokens.size();
  l.labels = L;
  l.unary.assign(l.length * L, 0.0);
  l.transition.assign(weights_.end() - static_cast<std::ptrdiff_t>(L * L), weights_.end());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    for (const auto& f : extract_features(tokens, t)) {
      auto a = attribute_index(f);
      if (!a) continue;
      for (std::size_t y = 0; y < L; ++y) l.unary[t * L + y] += weights_[*a * L + y];
    }
  }
  return l;
}

std::vector<std::string> CrfModel::decode(const std::vector<Token>& tokens) const {
  std::vector<std::string> out;
  for (auto y : viterbi(lattice(tokens))) out.push_back(tagset_.labels()[y]);
  return out;
}

std::string CrfModel::save() const {
  const auto L = tagset_.size();
  std::ostringstream out;
  out << "reqconflict-crf 1\n";
  out << "types";
  for (const auto& t : tagset_.entity_types()) out << ' ' << t;
  out << "\nc1 " << format_double(hyperparams_.c1) << "\nc2 " << format_double(hyperparams_.c2)
      << "\nmax_iterations " << hyperparams_.max_iterations << "\ntransitions\n";
  const auto base = attributes_.size() * L;
  for (std::size_t f = 0; f < L; ++f) {
    for (std::size_t t = 0; t < L; ++t) out << (t ? " " : "") << format_double(weights_[base + f * L + t]);
    out << '\n';
  }
  out << "attributes " << attributes_.size() << '\n';
  for (std::size_t a = 0; a < attributes_.size(); ++a) {
    out << attributes_[a] << '\t';
    for (std::size_t y = 0; y < L; ++y) out << (y ? " " : "") << format_double(weights_[a * L + y]);
    out << '\n';
  }
  return out.str();
}

CrfModel CrfModel::load(std::string_view text) {
  auto lines = split(text, '\n');
  std::size_t pos = 0;
  auto next = [&](std::string_view what) -> std::string {
    if (pos >= lines.size()) throw validation_error("CRF model truncated: expected " + std::string(what));
    auto line = lines[pos++];
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  auto fail = [&](const std::string& msg) { return validation_error("CRF model line " + std::to_string(pos) + ": " + msg); };
  auto keyed = [&](std::string_view key) {
    auto line = next(key);
    if (line.rfind(std::string(key) + " ", 0) != 0) throw fail("expected '" + std::string(key) + "'");
    return line.substr(key.size() + 1);
  };

  if (next("header") != "reqconflict-crf 1") throw fail("not a reqconflict-crf version 1 model");
  auto types_line = next("types");
  if (types_line.rfind("types", 0) != 0) throw fail("expected 'types'");
  std::vector<std::string> types;
  std::istringstream ts(types_line.substr(5));
  for (std::string t; ts >> t;) types.push_back(t);
  TagSet tagset(types);
  const auto L = tagset.size();

  CrfHyperparams hp;
  try {
    hp.c1 = parse_double(keyed("c1"));
    hp.c2 = parse_double(keyed("c2"));
    hp.max_iterations = static_cast<std::size_t>(std::stoull(keyed("max_iterations")));
  } catch (const std::logic_error&) {
    throw fail("bad hyperparameter value");
  }
  if (next("transitions") != "transitions") throw fail("expected 'transitions'");

  auto parse_row = [&](std::string_view row, std::vector<double>& into) {
    auto cells = split(trim(row), ' ');
    if (cells.size() != L) throw fail("expected " + std::to_string(L) + " weights");
    for (const auto& c : cells) into.push_back(parse_double(c));
  };
  std::vector<double> transitions;
  for (std::size_t f = 0; f < L; ++f) parse_row(next("transition row"), transitions);

  std::size_t n_attrs = 0;
  try {
    n_attrs = static_cast<std::size_t>(std::stoull(keyed("attributes")));
  } catch (const std::logic_error&) {
    throw fail("bad attribute count");
  }
  std::vector<std::string> attrs;
  std::vector<double> weights;
  weights.reserve(n_attrs * L + L * L);
  for (std::size_t a = 0; a < n_attrs; ++a) {
    auto line = next("attribute row");
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw fail("expected attribute<TAB>weights");
    attrs.push_back(line.substr(0, tab));
    parse_row(std::string_view(line).substr(tab + 1), weights);
  }
  weights.insert(weights.end(), transitions.begin(), transitions.end());
  return CrfModel(std::move(tagset), std::move(attrs), std::move(weights), hp);
}

CrfModel CrfModel::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw runtime_error("cannot read CRF model '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load(buf.str());
}

// ---------------------------------------------------------------------------

CrfObjective::CrfObjective(const std::vector<AnnotatedSentence>& corpus, const TagSet& tagset, double c2)
    : labels_(tagset.size()), c2_(c2) {
  std::map<std::string, std::size_t> index;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto& sent = corpus[s];
    if (sent.tokens.size() != sent.labels.size()) throw validation_error("sentence token/label length mismatch");
    if (auto err = check_bio(sent.labels, tagset)) {
      throw validation_error("training sentence " + std::to_string(s + 1) + ": " + *err);
    }
    std::vector<Item> items;
    for (std::size_t t = 0; t < sent.tokens.size(); ++t) {
      Item item;
      item.label = *tagset.index_of(sent.labels[t]);
      for (auto& f : extract_features(sent.tokens, t)) {
        auto [it, inserted] = index.emplace(f, attributes_.size());
        if (inserted) attributes_.push_back(f);
        item.attrs.push_back(it->second);
      }
      std::sort(item.attrs.begin(), item.attrs.end());
      item.attrs.erase(std::unique(item.attrs.begin(), item.attrs.end()), item.attrs.end());
      items.push_back(std::move(item));
    }
    if (!items.empty()) sentences_.push_back(std::move(items));
  }
}

double CrfObjective::operator()(std::span<const double> w, std::span<double> grad) const {
  const auto L = labels_;
  const auto trans_base = attributes_.size() * L;
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;

  std::vector<double> unary, alpha, beta, buf(L);
  for (const auto& sent : sentences_) {
    const auto T = sent.size();
    unary.assign(T * L, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      for (auto a : sent[t].attrs) {
        for (std::size_t y = 0; y < L; ++y) unary[t * L + y] += w[a * L + y];
      }
    }
    auto tr = [&](std::size_t p, std::size_t y) { return w[trans_base + p * L + y]; };

    alpha.assign(T * L, 0.0);
    beta.assign(T * L, 0.0);
    for (std::size_t y = 0; y < L; ++y) alpha[y] = unary[y];
    for (std::size_t t = 1; t < T; ++t) {
      for (std::size_t y = 0; y < L; ++y) {
        for (std::size_t p = 0; p < L; ++p) buf[p] = alpha[(t - 1) * L + p] + tr(p, y);
        alpha[t * L + y] = log_sum_exp(buf) + unary[t * L + y];
      }
    }
    for (std::size_t t = T - 1; t-- > 0;) {
      for (std::size_t y = 0; y < L; ++y) {
        for (std::size_t n = 0; n < L; ++n) buf[n] = tr(y, n) + unary[(t + 1) * L + n] + beta[(t + 1) * L + n];
        beta[t * L + y] = log_sum_exp(buf);
      }
    }
    const double log_z = log_sum_exp(std::span<const double>(alpha).subspan((T - 1) * L, L));

    double gold = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      gold += unary[t * L + sent[t].label];
      if (t > 0) gold += tr(sent[t - 1].label, sent[t].label);
    }
    loss += log_z - gold;

    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t y = 0; y < L; ++y) {
        double marginal = std::exp(alpha[t * L + y] + beta[t * L + y] - log_z);
        double g = marginal - (sent[t].label == y ? 1.0 : 0.0);
        for (auto a : sent[t].attrs) grad[a * L + y] += g;
      }
      if (t == 0) continue;
      for (std::size_t p = 0; p < L; ++p) {
        for (std::size_t y = 0; y < L; ++y) {
          double pair = std::exp(alpha[(t - 1) * L + p] + tr(p, y) + unary[t * L + y] + beta[t * L + y] - log_z);
          grad[trans_base + p * L + y] += pair;
        }
      }
      grad[trans_base + sent[t - 1].label * L + sent[t].label] -= 1.0;
    }
  }

  if (c2_ != 0.0) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      loss += c2_ * w[i] * w[i];
      grad[i] += 2.0 * c2_ * w[i];
    }
  }
  return loss;
}

CrfTraining train_crf(const std::vector<AnnotatedSentence>& corpus, const TagSet& tagset,
                      const CrfHyperparams& hp) {
  if (corpus.empty()) throw validation_error("cannot train a CRF on an empty corpus");
  if (hp.c1 < 0 || hp.c2 < 0) throw config_error("c1 and c2 must be non-negative");
  CrfObjective objective(corpus, tagset, hp.c2);

  optimize::Options opt;
  opt.max_iterations = hp.max_iterations;
  opt.l1 = hp.c1;
  auto result = optimize::minimize(
      [&](std::span<const double> w, std::span<double> g) { return objective(w, g); },
      std::vector<double>(objective.dimension(), 0.0), opt);

  CrfTraining out{CrfModel(tagset, objective.attributes(), result.x, hp), std::move(result)};
  return out;
}

std::vector<EntitySpan> CrfTagger::tag(std::string_view, const std::vector<Token>& tokens) const {
  if (tokens.empty()) return {};
  return spans_from_tags(tokens, model_.decode(tokens));
}

// ---------------------------------------------------------------------------

NerFoldCounts count_ner(const std::vector<std::vector<std::string>>& gold,
                        const std::vector<std::vector<std::string>>& predicted, const TagSet& tagset) {
  if (gold.size() != predicted.size()) throw validation_error("count_ner: sentence count mismatch");
  NerFoldCounts c;
  for (const auto& t : tagset.entity_types()) c.tp[t] = c.predicted[t] = c.gold[t] = 0;
  auto type_of = [](const std::string& l) { return l == "O" ? std::string() : l.substr(2); };
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != predicted[s].size()) throw validation_error("count_ner: label length mismatch");
    for (std::size_t i = 0; i < gold[s].size(); ++i) {
      auto g = type_of(gold[s][i]);
      auto p = type_of(predicted[s][i]);
      ++c.tokens;
      if (gold[s][i] == predicted[s][i]) ++c.correct;
      if (!g.empty()) ++c.gold[g];
      if (!p.empty()) ++c.predicted[p];
      if (!g.empty() && g == p) ++c.tp[g];
    }
  }
  return c;
}

namespace {

struct Prf {
  double p = 0, r = 0, f = 0, support = 0;
};

Prf prf(double tp, double pred, double gold) {
  Prf x;
  x.p = pred > 0 ? tp / pred : 0.0;
  x.r = gold > 0 ? tp / gold : 0.0;
  x.f = (x.p + x.r) > 0 ? 2 * x.p * x.r / (x.p + x.r) : 0.0;
  x.support = gold;
  return x;
}

EntityScores summarize(const std::vector<Prf>& folds) {
  EntityScores s;
  s.folds = folds.size();
  if (folds.empty()) return s;
  auto stat = [&](auto get) {
    double mean = 0;
    for (const auto& f : folds) mean += get(f);
    mean /= static_cast<double>(folds.size());
    double var = 0;
    for (const auto& f : folds) var += (get(f) - mean) * (get(f) - mean);
    return MeanStd{mean, std::sqrt(var / static_cast<double>(folds.size()))};
  };
  s.precision = stat([](const Prf& f) { return f.p; });
  s.recall = stat([](const Prf& f) { return f.r; });
  s.f1 = stat([](const Prf& f) { return f.f; });
  s.support = stat([](const Prf& f) { return f.support; });
  return s;
}

std::string cell(const MeanStd& m) { return format_fixed(m.mean, 2) + " ± " + format_fixed(m.std, 2); }

}  // namespace

NerEvaluation evaluate_ner(const std::vector<AnnotatedSentence>& corpus, const TagSet& tagset,
                           const CrfHyperparams& hp, std::size_t n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw config_error("NER evaluation needs at least 2 folds");
  if (corpus.size() < n_folds) {
    throw validation_error("corpus has " + std::to_string(corpus.size()) + " sentences, fewer than " +
                           std::to_string(n_folds) + " folds");
  }
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

  NerEvaluation eval;
  std::map<std::string, std::vector<Prf>> per_type;
  std::vector<Prf> micro, macro, weighted;
  std::size_t tokens = 0, correct = 0;

  for (std::size_t fold = 0; fold < n_folds; ++fold) {
    std::vector<AnnotatedSentence> train;
    std::vector<const AnnotatedSentence*> test;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (k % n_folds == fold) test.push_back(&corpus[order[k]]);
      else train.push_back(corpus[order[k]]);
    }
    auto model = train_crf(train, tagset, hp).model;
    std::vector<std::vector<std::string>> gold, pred;
    for (const auto* s : test) {
      gold.push_back(s->labels);
      pred.push_back(model.decode(s->tokens));
    }
    auto c = count_ner(gold, pred, tagset);
    tokens += c.tokens;
    correct += c.correct;

    double tp_sum = 0, pred_sum = 0, gold_sum = 0;
    Prf mac, wei;
    std::size_t present = 0;
    for (const auto& t : tagset.entity_types()) {
      tp_sum += static_cast<double>(c.tp[t]);
      pred_sum += static_cast<double>(c.predicted[t]);
      if (c.gold[t] == 0) {
        eval.warnings.push_back("fold " + std::to_string(fold) + ": no gold " + t + " tokens; excluded");
        continue;
      }
      gold_sum += static_cast<double>(c.gold[t]);
      auto x = prf(static_cast<double>(c.tp[t]), static_cast<double>(c.predicted[t]), static_cast<double>(c.gold[t]));
      per_type[t].push_back(x);
      ++present;
      mac.p += x.p;
      mac.r += x.r;
      mac.f += x.f;
      wei.p += x.p * x.support;
      wei.r += x.r * x.support;
      wei.f += x.f * x.support;
    }
    micro.push_back(prf(tp_sum, pred_sum, gold_sum));
    if (present > 0) {
      auto n = static_cast<double>(present);
      macro.push_back({mac.p / n, mac.r / n, mac.f / n, gold_sum});
      weighted.push_back({wei.p / gold_sum, wei.r / gold_sum, wei.f / gold_sum, gold_sum});
    }
  }

  for (const auto& t : tagset.entity_types()) eval.per_type.emplace_back(t, summarize(per_type[t]));
  eval.micro = summarize(micro);
  eval.macro = summarize(macro);
  eval.weighted = summarize(weighted);
  eval.token_accuracy = tokens ? static_cast<double>(correct) / static_cast<double>(tokens) : 0.0;
  return eval;
}

std::string NerEvaluation::to_table() const {
  std::string out = "| entity | precision | recall | f1 | support |\n|---|---|---|---|---|\n";
  auto row = [&](const std::string& name, const EntityScores& s) {
    out += "| " + name + " | " + cell(s.precision) + " | " + cell(s.recall) + " | " + cell(s.f1) + " | " +
           format_fixed(s.support.mean, 1) + " |\n";
  };
  for (const auto& [t, s] : per_type) row(t, s);
  row("micro avg", micro);
  row("macro avg", macro);
  row("weighted avg", weighted);
  return out;
}

}  // namespace reqconflict
