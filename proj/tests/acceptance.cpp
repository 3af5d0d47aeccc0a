// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Every check uses an oracle computed here, independently of
// the code under test, or a fixed expected value.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "overlap_table.hpp"
#include "reqconflict/crf.hpp"
#include "reqconflict/eval.hpp"
#include "reqconflict/pipeline.hpp"
#include "reqconflict/semantic.hpp"
#include "reqconflict/similarity.hpp"
#include "reqconflict/threshold.hpp"
#include "support.hpp"

using namespace reqconflict;

namespace {

// Phase II macro F1 for the bundled synthetic set, TFIDF, 3 folds, seed 7 and
// the general tagger, recorded from a reference run of this implementation.
constexpr double kPinnedPhase2F1 = 0.963370;
constexpr std::uint64_t kSeed = 7;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Criterion {
 public:
  explicit Criterion(Outcome& o) : o_(o) {}
  void require(bool ok, const std::string& what) {
    if (!ok && o_.pass) {
      o_.pass = false;
      o_.detail = what;
    }
  }

 private:
  Outcome& o_;
};

int failures = 0;

void run(int number, const std::string& title, double budget_s, const std::function<std::string(Criterion&)>& body) {
  Outcome o;
  Criterion c(o);
  auto start = std::chrono::steady_clock::now();
  std::string summary;
  try {
    summary = body(c);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (o.pass && elapsed >= budget_s) {
    o.pass = false;
    o.detail = "took " + std::to_string(elapsed) + " s, budget " + std::to_string(budget_s) + " s";
  }
  if (!o.pass) ++failures;
  std::printf("criterion %d %s %s: %s (%.3f s)\n", number, o.pass ? "PASS" : "FAIL", title.c_str(),
              o.pass ? summary.c_str() : o.detail.c_str(), elapsed);
  std::fflush(stdout);
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

// Criterion 3 helpers -------------------------------------------------------

double youden(const RocPoint& p) { return p.tpr - p.fpr; }

SimilarityMatrix random_matrix(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("r" + std::to_string(i));
  std::vector<double> v(n * n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) v[i * n + j] = v[j * n + i] = u(rng);
  }
  return SimilarityMatrix(ids, v);
}

// Criterion 4 helpers -------------------------------------------------------

template <typename F>
void for_each_path(std::size_t length, std::size_t labels, F&& visit) {
  std::vector<std::size_t> path(length, 0);
  while (true) {
    visit(path);
    std::size_t t = length;
    while (t > 0) {
      if (++path[t - 1] < labels) break;
      path[--t] = 0;
    }
    if (t == 0) return;
  }
}

double brute_score(const ScoreLattice& lat, const std::vector<std::size_t>& path) {
  double s = 0;
  for (std::size_t t = 0; t < path.size(); ++t) {
    s += lat.unary[t * lat.labels + path[t]];
    if (t > 0) s += lat.transition[path[t - 1] * lat.labels + path[t]];
  }
  return s;
}

}  // namespace

int main() {
  run(1, "overlap table", 1.0, [](Criterion& c) {
    auto cand = testing::profile_of(testing::overlap_candidate());
    const std::vector<std::size_t> counts{7, 5, 2, 2, 2};
    const std::vector<std::string> displays{"1.00", "0.71", "0.28", "0.28", "0.28"};
    std::vector<std::string> got_counts, got_displays;
    std::vector<EntityProfile> neighbors;
    auto rows = testing::overlap_neighbors();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto p = testing::profile_of(rows[i]);
      neighbors.push_back(p);
      auto n = overlap(cand, p);
      auto d = truncate_ratio(n, unique_entities(cand));
      got_counts.push_back(std::to_string(n));
      got_displays.push_back(d);
      c.require(n == counts[i], rows[i].id + " overlap " + std::to_string(n) + ", expected " + std::to_string(counts[i]));
      c.require(d == displays[i], rows[i].id + " ratio " + d + ", expected " + displays[i]);
    }
    auto best = overlap_ratio(cand, neighbors);
    c.require(best.best_match == "r1" && best.ratio() >= 1.0, "candidate should be kept with best match r1");
    return "counts " + join(got_counts) + ", ratios " + join(got_displays);
  });

  run(2, "cosine and TF-IDF oracles", 10.0, [](Criterion& c) {
    std::vector<double> u{1, 2, 2}, v{2, 1, 2};
    double cos = cosine(u, v);
    c.require(std::abs(cos - 8.0 / 9.0) <= 1e-12, "cosine((1,2,2),(2,1,2)) = " + format_double(cos));

    auto model = TfidfModel::fit(std::vector<std::string>{"uav shall charge", "uav shall fly", "system shall log data"});
    // df: uav 2, shall 3, charge/fly/system/log/data 1; N = 3
    const std::vector<std::pair<std::string, double>> hand{
        {"uav", std::log(4.0 / 3.0) + 1}, {"shall", 1.0},  {"charge", std::log(2.0) + 1}, {"fly", std::log(2.0) + 1},
        {"system", std::log(2.0) + 1},     {"log", std::log(2.0) + 1}, {"data", std::log(2.0) + 1}};
    c.require(model.vocabulary_size() == hand.size(), "vocabulary size");
    for (const auto& [term, idf] : hand) {
      c.require(std::abs(model.idf(term) - idf) <= 1e-9, "idf(" + term + ") = " + format_double(model.idf(term)));
    }

    auto set = load_requirements(testing::data_path("synthetic_uav.csv"));
    std::size_t vectors = 0;
    double worst = 0;
    auto check_table = [&](const EmbeddingTable& t) {
      for (const auto& vec : t.vectors()) {
        double n = 0;
        for (double x : vec.values()) n += x * x;
        worst = std::max(worst, std::abs(std::sqrt(n) - 1.0));
        ++vectors;
      }
    };
    check_table(TfidfModel::fit(set).embed_all(set));
    check_table(TfidfModel::fit(set, set.ids()).embed_all(set));
    check_table(load_external_embeddings_file(testing::data_path("fixtures/synthetic_uav_hash32.ndjson")).aligned_to(set));
    check_table(fuse(load_external_embeddings_file(testing::data_path("fixtures/synthetic_uav_hash32.ndjson")).aligned_to(set),
                     TfidfModel::fit(set).embed_all(set), 16, kSeed));
    c.require(worst <= 1e-9, "unit-norm deviation " + format_double(worst));
    std::ostringstream s;
    s << "cos = " << format_fixed(cos, 12) << ", 7 idf values match, " << vectors << " vectors unit-norm (max dev "
      << std::scientific << worst << ")";
    return s.str();
  });

  run(3, "threshold selection", 10.0, [](Criterion& c) {
    std::mt19937_64 rng(20240601);
    auto grid = threshold_grid();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
      // Coarse rates make objective ties common.
      std::size_t n = 1 + rng() % 30;
      std::vector<RocPoint> pts;
      for (std::size_t i = 0; i < n; ++i) {
        pts.push_back({grid[rng() % grid.size()], std::round(u(rng) * 4) / 4, std::round(u(rng) * 4) / 4});
      }
      // Exhaustive oracle: best objective, then smallest k among the best.
      double best = -INFINITY, best_k = INFINITY;
      for (const auto& p : pts) best = std::max(best, youden(p));
      for (const auto& p : pts) {
        if (youden(p) == best) best_k = std::min(best_k, p.k);
      }
      auto sel = select_cutoff(pts);
      c.require(sel.delta == best_k, "trial " + std::to_string(trial) + ": delta " + format_double(sel.delta) +
                                         " vs oracle " + format_double(best_k));
    }
    for (int trial = 0; trial < 100; ++trial) {
      auto m = random_matrix(12, rng);
      std::size_t prev = m.size() + 1;
      for (double k : grid) {
        std::size_t positives = 0;
        for (const auto& [id, v] : predict_labels(m, m.ids(), k)) positives += v;
        c.require(positives <= prev, "predicted positives grew at k = " + format_double(k));
        prev = positives;
      }
    }
    return "1000 ROC instances match the exhaustive argmax; positives non-increasing over the grid on 100 matrices";
  });

  run(4, "CRF correctness", 60.0, [](Criterion& c) {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 100; ++trial) {
      std::size_t length = 1 + rng() % 5, labels = 1 + rng() % 5;
      ScoreLattice lat{length, labels, std::vector<double>(length * labels), std::vector<double>(labels * labels)};
      for (auto& x : lat.unary) x = g(rng);
      for (auto& x : lat.transition) x = g(rng);
      double best = -INFINITY;
      std::vector<std::size_t> arg;
      for_each_path(length, labels, [&](const std::vector<std::size_t>& p) {
        double s = brute_score(lat, p);
        if (s > best) best = s, arg = p;
      });
      c.require(viterbi(lat) == arg, "viterbi differs from enumeration in trial " + std::to_string(trial));
    }

    auto tagset = TagSet::software();
    auto corpus = load_annotated_corpus(testing::data_path("ner_toy.tsv"), tagset);
    CrfObjective objective(corpus, tagset, 0.1);
    std::vector<double> w(objective.dimension()), grad(w.size()), scratch(w.size());
    std::normal_distribution<double> small(0.0, 0.1);
    for (auto& x : w) x = small(rng);
    objective(w, grad);
    double worst = 0;
    const double h = 1e-5;
    for (std::size_t i = 0; i < w.size(); i += 1 + w.size() / 400) {
      auto wp = w, wm = w;
      wp[i] += h;
      wm[i] -= h;
      double numeric = (objective(wp, scratch) - objective(wm, scratch)) / (2 * h);
      worst = std::max(worst, std::abs(numeric - grad[i]) / std::max(1.0, std::abs(numeric)));
    }
    c.require(worst <= 1e-4, "gradient relative error " + format_double(worst));

    auto training = train_crf(corpus, tagset, {0.1, 0.1, 100});
    std::size_t tokens = 0, correct = 0;
    for (const auto& s : corpus) {
      auto pred = training.model.decode(s.tokens);
      for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == s.labels[i];
      tokens += pred.size();
    }
    double acc = static_cast<double>(correct) / static_cast<double>(tokens);
    c.require(training.optimizer.iterations <= 100, "more than 100 iterations");
    c.require(acc >= 0.95, "training token accuracy " + format_fixed(acc, 4));
    std::ostringstream s;
    s << "100 Viterbi trials exact, max gradient rel. error " << std::scientific << worst << std::fixed
      << ", training accuracy " << format_fixed(acc, 4) << " after " << training.optimizer.iterations
      << " iterations on " << corpus.size() << " sentences";
    return s.str();
  });

  run(5, "end-to-end desk-scale run", 30.0, [](Criterion& c) {
    testing::TempDir tmp;
    RunConfig config;
    config.dataset = testing::data_path("synthetic_uav.csv");
    config.embedding = EmbeddingScheme::Tfidf;
    config.n_folds = 3;
    config.seed = kSeed;
    config.ner = {"general"};
    config.output = (tmp / "run").string();

    auto set = load_requirements(config.dataset);
    std::size_t pairs = 0;
    for (const auto& r : set.requirements()) pairs += r.partners.size();
    pairs /= 2;
    c.require(set.size() == 60 && pairs == 12, "bundled set should hold 60 requirements and 12 pairs");

    cmd_phase1(config);
    auto p2 = cmd_phase2(tmp / "run");
    const auto& p1 = p2.phase1;

    // Metrics recomputed here from raw predictions.
    auto macro_f1 = [&](auto predicted_for_fold) {
      std::vector<double> per_fold;
      for (std::size_t f = 0; f < 3; ++f) {
        double tp = 0, fp = 0, fn = 0, tn = 0;
        for (const auto& id : p1.results[f].test_ids) {
          bool p = predicted_for_fold(f, id), gold = set.at(id).gold_conflict;
          tp += p && gold;
          fp += p && !gold;
          fn += !p && gold;
          tn += !p && !gold;
        }
        auto f1 = [](double tp_, double fp_, double fn_) {
          double pr = tp_ + fp_ > 0 ? tp_ / (tp_ + fp_) : 0, rc = tp_ + fn_ > 0 ? tp_ / (tp_ + fn_) : 0;
          return pr + rc > 0 ? 2 * pr * rc / (pr + rc) : 0;
        };
        per_fold.push_back((f1(tp, fp, fn) + f1(tn, fn, fp)) / 2);
      }
      return (per_fold[0] + per_fold[1] + per_fold[2]) / 3;
    };
    double f1_phase1 = macro_f1([&](std::size_t f, const std::string& id) { return p1.results[f].candidates.contains(id); });
    const auto& finals = p2.finals.at("general");
    double f1_phase2 = macro_f1([&](std::size_t f, const std::string& id) { return finals[f].contains(id); });

    for (std::size_t f = 0; f < 3; ++f) {
      for (const auto& id : finals[f].members) {
        c.require(p1.results[f].candidates.contains(id), "phase II kept " + id + " which is not a phase I candidate");
      }
    }
    c.require(f1_phase1 >= 0.75, "phase I macro F1 " + format_fixed(f1_phase1, 4) + " < 0.75");
    c.require(std::abs(f1_phase2 - kPinnedPhase2F1) <= 0.05,
              "phase II macro F1 " + format_fixed(f1_phase2, 6) + " vs pinned " + format_fixed(kPinnedPhase2F1, 6));
    c.require(std::abs(p1.report.phase1_summary().macro.f1.mean - f1_phase1) < 1e-12, "report disagrees with oracle");
    return "phase I macro F1 " + format_fixed(f1_phase1, 4) + ", phase II " + format_fixed(f1_phase2, 4) + " (pinned " +
           format_fixed(kPinnedPhase2F1, 4) + "), phase II within candidates";
  });

  run(6, "fold invariant", 30.0, [](Criterion& c) {
    std::mt19937_64 rng(5150);
    auto bundled = load_requirements(testing::data_path("synthetic_uav.csv"));
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      // Alternate the bundled set with random conflict graphs.
      RequirementSet set = bundled;
      if (seed % 2 == 1) {
        std::size_t n = 2 + rng() % 40;
        std::vector<Requirement> reqs;
        for (std::size_t i = 0; i < n; ++i) reqs.push_back({"q" + std::to_string(i), "text", false, {}});
        std::size_t edges = rng() % (n + 1);
        for (std::size_t e = 0; e < edges; ++e) {
          std::size_t a = rng() % n, b = rng() % n;
          if (a == b) continue;
          auto& pa = reqs[a].partners;
          if (std::find(pa.begin(), pa.end(), reqs[b].id) != pa.end()) continue;
          pa.push_back(reqs[b].id);
          reqs[b].partners.push_back(reqs[a].id);
          reqs[a].gold_conflict = reqs[b].gold_conflict = true;
        }
        set = RequirementSet::make("random", reqs);
      }
      std::size_t k = 2 + seed % 4;
      auto folds = make_folds(set, k, seed);
      std::multiset<std::string> covered;
      for (std::size_t f = 0; f < k; ++f) {
        for (const auto& id : folds.ids_in(f, set)) covered.insert(id);
      }
      auto ids = set.ids();
      c.require(covered == std::multiset<std::string>(ids.begin(), ids.end()),
                "seed " + std::to_string(seed) + ": folds do not partition the ids");
      for (const auto& r : set.requirements()) {
        for (const auto& p : r.partners) {
          c.require(folds.assignment.at(r.id) == folds.assignment.at(p),
                    "seed " + std::to_string(seed) + ": " + r.id + " and " + p + " split");
        }
      }
    }
    return "1000 generations, partners always co-located, folds partition the ids";
  });

  run(7, "report arithmetic", 1.0, [](Criterion& c) {
    auto s = format_delta(0.43, 0.47);
    c.require(s == "↑ 0.04 / 9.30%", "got '" + s + "'");
    return "0.43 -> 0.47 formats as '" + s + "'";
  });

  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
