#include "reqconflict/pipeline.hpp"

#include <cstdlib>
#include <ostream>
#include <set>
#include <sstream>

#include "reqconflict/error.hpp"
#include "reqconflict/io.hpp"
#include "reqconflict/text.hpp"

namespace reqconflict {

namespace fs = std::filesystem;

namespace {

std::size_t parse_count(const std::string& key, const std::string& value) {
  if (value.empty() || !is_all_digits(value)) throw config_error(key + " must be a non-negative integer, got '" + value + "'");
  try {
    return static_cast<std::size_t>(std::stoull(value));
  } catch (const std::exception&) {
    throw config_error(key + " is out of range: " + value);
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    return parse_double(value);
  } catch (const Error&) {
    throw config_error(key + " must be a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  auto v = to_lower(value);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw config_error(key + " must be true or false, got '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  for (const auto& part : split(value, ',')) {
    auto p = std::string(trim(part));
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string to_string(EmbeddingScheme scheme) {
  switch (scheme) {
    case EmbeddingScheme::Tfidf: return "tfidf";
    case EmbeddingScheme::External: return "external";
    case EmbeddingScheme::Fused: return "fused";
  }
  return "?";
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "dataset") {
    dataset = value;
  } else if (key == "embedding") {
    if (value == "tfidf") embedding = EmbeddingScheme::Tfidf;
    else if (value == "external") embedding = EmbeddingScheme::External;
    else if (value == "fused") embedding = EmbeddingScheme::Fused;
    else throw config_error("embedding must be tfidf, external or fused, got '" + value + "'");
  } else if (key == "external_embeddings") {
    external_embeddings = value;
  } else if (key == "target_dim") {
    target_dim = parse_count(key, value);
  } else if (key == "n_folds") {
    n_folds = parse_count(key, value);
  } else if (key == "seed") {
    seed = parse_count(key, value);
  } else if (key == "ner") {
    ner = split_list(value);
  } else if (key == "m_count") {
    m_count = parse_count(key, value);
  } else if (key == "t_o") {
    t_o = parse_real(key, value);
  } else if (key == "objective") {
    if (value == "youden") objective = Objective::Youden;
    else if (value == "literal") objective = Objective::Literal;
    else throw config_error("objective must be youden or literal, got '" + value + "'");
  } else if (key == "similarity_scope") {
    if (value == "global") similarity_scope = SimilarityScope::Global;
    else if (value == "fold") similarity_scope = SimilarityScope::Fold;
    else throw config_error("similarity_scope must be global or fold, got '" + value + "'");
  } else if (key == "tfidf_fit") {
    if (value == "global") tfidf_fit = TfidfFit::Global;
    else if (value == "fold") tfidf_fit = TfidfFit::Fold;
    else throw config_error("tfidf_fit must be global or fold, got '" + value + "'");
  } else if (key == "output") {
    output = value;
  } else if (key == "dump_matrix") {
    dump_matrix = parse_bool(key, value);
  } else {
    throw config_error("unknown config key '" + key + "'");
  }
}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig config;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto body = trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw config_error("config line " + std::to_string(line_no) + ": expected key = value");
    }
    auto key = std::string(trim(body.substr(0, eq)));
    auto value = std::string(trim(body.substr(eq + 1)));
    try {
      config.set(key, value);
    } catch (const Error& e) {
      throw config_error("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

RunConfig RunConfig::load(const std::string& path) {
  if (!fs::exists(path)) throw config_error("config file '" + path + "' does not exist");
  return parse(read_file(path));
}

std::string RunConfig::snapshot() const {
  std::ostringstream out;
  out << "dataset = " << dataset << '\n';
  out << "embedding = " << to_string(embedding) << '\n';
  out << "external_embeddings = " << external_embeddings << '\n';
  out << "target_dim = " << target_dim << '\n';
  out << "n_folds = " << n_folds << '\n';
  out << "seed = " << seed << '\n';
  out << "ner = " << join(ner, ",") << '\n';
  out << "m_count = " << m_count << '\n';
  out << "t_o = " << format_double(t_o) << '\n';
  out << "objective = " << (objective == Objective::Youden ? "youden" : "literal") << '\n';
  out << "similarity_scope = " << (similarity_scope == SimilarityScope::Global ? "global" : "fold") << '\n';
  out << "tfidf_fit = " << (tfidf_fit == TfidfFit::Global ? "global" : "fold") << '\n';
  out << "output = " << output << '\n';
  out << "dump_matrix = " << (dump_matrix ? "true" : "false") << '\n';
  return out.str();
}

void RunConfig::validate(bool check_paths) const {
  if (dataset.empty()) throw config_error("dataset is not set");
  if (n_folds < 2) throw config_error("n_folds must be at least 2");
  if (m_count < 1) throw config_error("m_count must be at least 1");
  if (!(t_o >= 0.0 && t_o <= 1.0)) throw config_error("t_o must lie in [0, 1]");
  if (ner.empty()) throw config_error("ner must name at least one backend");
  auto paths = split_list(external_embeddings);
  if (embedding != EmbeddingScheme::Tfidf && paths.empty()) {
    throw config_error("embedding = " + to_string(embedding) + " needs external_embeddings");
  }
  if (embedding == EmbeddingScheme::External && paths.size() != 1) {
    throw config_error("embedding = external takes exactly one external_embeddings path");
  }
  if (embedding == EmbeddingScheme::Fused && paths.size() > 2) {
    throw config_error("embedding = fused takes one or two external_embeddings paths");
  }
  if (embedding == EmbeddingScheme::Fused && target_dim < 1) throw config_error("target_dim must be at least 1");
  std::set<std::string> seen;
  for (const auto& b : ner) {
    if (!seen.insert(b).second) throw config_error("ner backend '" + b + "' listed twice");
    if (b == "general") continue;
    auto colon = b.find(':');
    auto kind = b.substr(0, colon);
    if (colon == std::string::npos || (kind != "crf" && kind != "file") || colon + 1 == b.size()) {
      throw config_error("ner backend must be general, crf:<model> or file:<corpus>, got '" + b + "'");
    }
    if (check_paths && !fs::exists(b.substr(colon + 1))) {
      throw config_error("ner backend file '" + b.substr(colon + 1) + "' does not exist");
    }
  }
  if (check_paths) {
    if (!fs::exists(dataset)) throw config_error("dataset '" + dataset + "' does not exist");
    for (const auto& p : paths) {
      if (!fs::exists(p)) throw config_error("external_embeddings file '" + p + "' does not exist");
    }
  }
}

fs::path RunConfig::output_dir() const {
  if (!output.empty()) return output;
  const char* root = std::getenv("REQCONFLICT_OUTPUT_ROOT");
  fs::path base = (root && *root) ? fs::path(root) : fs::path("runs");
  return base / fs::path(dataset).stem();
}

EmbeddingTable build_embeddings(const RunConfig& config, const RequirementSet& set,
                                const std::vector<std::string>* fit_ids) {
  auto tfidf = [&] {
    auto model = fit_ids ? TfidfModel::fit(set, *fit_ids) : TfidfModel::fit(set);
    return model.embed_all(set);
  };
  auto paths = split_list(config.external_embeddings);
  switch (config.embedding) {
    case EmbeddingScheme::Tfidf:
      return tfidf();
    case EmbeddingScheme::External:
      return load_external_embeddings_file(paths.at(0)).aligned_to(set);
    case EmbeddingScheme::Fused: {
      auto a = load_external_embeddings_file(paths.at(0)).aligned_to(set);
      auto b = paths.size() == 2 ? load_external_embeddings_file(paths[1]).aligned_to(set) : tfidf();
      return fuse(a, b, config.target_dim, config.seed);
    }
  }
  throw config_error("unknown embedding scheme");
}

std::unique_ptr<EntityTagger> make_tagger(const std::string& backend) {
  if (backend == "general") return std::make_unique<GeneralTagger>();
  auto colon = backend.find(':');
  auto kind = backend.substr(0, colon);
  auto path = colon == std::string::npos ? std::string() : backend.substr(colon + 1);
  if (kind == "crf") return std::make_unique<CrfTagger>(CrfModel::load_file(path));
  if (kind == "file") return std::make_unique<ExternalTagger>(ExternalTagger::load(path));
  throw config_error("unknown ner backend '" + backend + "'");
}

namespace {

struct Prepared {
  RequirementSet set;
  FoldAssignment folds;
  std::vector<SimilarityMatrix> matrices;  // one per fold, shared when fitted globally
  std::vector<std::size_t> matrix_of_fold;
  std::vector<std::pair<std::string, std::string>> metadata;
};

Prepared prepare(const RunConfig& config) {
  config.validate();
  Prepared p{load_requirements(config.dataset), {}, {}, {}, {}};
  p.folds = make_folds(p.set, config.n_folds, config.seed);

  bool per_fold = config.tfidf_fit == TfidfFit::Fold && config.embedding != EmbeddingScheme::External;
  std::string source;
  std::size_t dim = 0;
  if (per_fold) {
    for (std::size_t f = 0; f < config.n_folds; ++f) {
      auto train = p.folds.ids_outside(f, p.set);
      auto table = build_embeddings(config, p.set, &train);
      source = table.source();
      dim = std::max(dim, table.dim());
      p.matrices.push_back(pairwise_matrix(table));
      p.matrix_of_fold.push_back(f);
    }
  } else {
    auto table = build_embeddings(config, p.set);
    source = table.source();
    dim = table.dim();
    p.matrices.push_back(pairwise_matrix(table));
    p.matrix_of_fold.assign(config.n_folds, 0);
  }

  std::size_t conflicts = 0;
  for (const auto& r : p.set.requirements()) conflicts += r.gold_conflict ? 1 : 0;
  p.metadata = {
      {"dataset", p.set.name()},
      {"requirements", std::to_string(p.set.size())},
      {"gold_conflicts", std::to_string(conflicts)},
      {"embedding", source},
      {"embedding_dim", per_fold ? "per fold, max " + std::to_string(dim) : std::to_string(dim)},
  };
  if (config.embedding == EmbeddingScheme::Fused) p.metadata.emplace_back("target_dim", std::to_string(config.target_dim));
  p.metadata.emplace_back("n_folds", std::to_string(config.n_folds));
  p.metadata.emplace_back("seed", std::to_string(config.seed));
  p.metadata.emplace_back("objective", config.objective == Objective::Youden ? "youden" : "literal");
  p.metadata.emplace_back("similarity_scope", config.similarity_scope == SimilarityScope::Global ? "global" : "fold");
  p.metadata.emplace_back("tfidf_fit", config.tfidf_fit == TfidfFit::Global ? "global" : "fold");
  return p;
}

Labels gold_for(const RequirementSet& set, const std::vector<std::string>& ids) {
  Labels gold;
  for (const auto& id : ids) gold[id] = set.at(id).gold_conflict;
  return gold;
}

std::string candidates_csv(const CandidateConflictSet& c) {
  std::string out = "id,most_similar,similarity\n";
  for (const auto& id : c.members) {
    const auto& n = c.evidence.at(id);
    out += id + "," + n.id + "," + format_fixed(n.similarity, 6) + "\n";
  }
  return out;
}

std::string folds_csv(const RequirementSet& set, const FoldAssignment& folds) {
  std::string out = "id,fold\n";
  for (const auto& r : set.requirements()) out += r.id + "," + std::to_string(folds.assignment.at(r.id)) + "\n";
  return out;
}

Phase1Run run_phase1(const RunConfig& config, Prepared& p) {
  Phase1Run run{p.set, p.folds, {}, {}};
  run.report.metadata = p.metadata;
  Phase1Options opts{config.objective, config.similarity_scope};
  for (std::size_t f = 0; f < config.n_folds; ++f) {
    const auto& m = p.matrices[p.matrix_of_fold[f]];
    auto result = phase1_detect(p.set, m, p.folds, f, opts);
    FoldReport fold;
    fold.delta = result.selection.delta;
    fold.roc = result.selection.points;
    fold.phase1 = confusion(result.predicted, gold_for(p.set, result.test_ids));
    run.report.folds.push_back(std::move(fold));
    run.results.push_back(std::move(result));
  }
  return run;
}

std::vector<std::string> read_csv_column(const fs::path& path, const std::string& header) {
  if (!fs::exists(path)) throw runtime_error("missing artifact " + path.string());
  auto text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw runtime_error("corrupt artifact " + path.string() + ": expected header '" + header + "'");
  }
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(line);
  }
  return rows;
}

}  // namespace

Phase1Run cmd_phase1(const RunConfig& config) {
  auto p = prepare(config);
  auto run = run_phase1(config, p);
  auto dir = config.output_dir();

  // Drop Phase II outputs from an earlier run so the tree matches this run only.
  std::error_code ec;
  if (fs::exists(dir / "folds", ec)) {
    for (const auto& fold_dir : fs::directory_iterator(dir / "folds", ec)) {
      if (!fold_dir.is_directory()) continue;
      for (const auto& entry : fs::directory_iterator(fold_dir.path(), ec)) {
        auto name = entry.path().filename().string();
        if (name == "final.csv" || name.rfind("confusion_phase2_", 0) == 0) fs::remove(entry.path(), ec);
      }
    }
  }

  for (std::size_t f = 0; f < config.n_folds; ++f) {
    write_file_atomic(dir / "folds" / std::to_string(f) / "candidates.csv", candidates_csv(run.results[f].candidates));
  }
  write_file_atomic(dir / "folds.csv", folds_csv(p.set, p.folds));
  if (config.dump_matrix) {
    if (p.matrices.size() == 1) {
      write_file_atomic(dir / "matrix.csv", p.matrices[0].to_csv());
    } else {
      for (std::size_t f = 0; f < p.matrices.size(); ++f) {
        write_file_atomic(dir / "folds" / std::to_string(f) / "matrix.csv", p.matrices[f].to_csv());
      }
    }
  }
  write_file_atomic(dir / "config.snapshot", config.snapshot());
  render_report(run.report, dir);
  return run;
}

Phase2Run cmd_phase2(const fs::path& run_dir, const std::map<std::string, std::string>& overrides) {
  auto snapshot = run_dir / "config.snapshot";
  if (!fs::exists(snapshot)) throw runtime_error("missing artifact " + snapshot.string());
  auto config = RunConfig::parse(read_file(snapshot));
  for (const auto& [k, v] : overrides) {
    if (k != "ner" && k != "m_count" && k != "t_o") throw config_error("phase2 cannot override '" + k + "'");
    config.set(k, v);
  }
  config.output = run_dir.string();
  config.validate();

  auto p = prepare(config);

  // The stored fold split and candidate sets are the contract with Phase I;
  // recomputing them must agree, otherwise the inputs changed underneath.
  auto stored_folds = read_csv_column(run_dir / "folds.csv", "id,fold");
  if (stored_folds.size() != p.set.size()) {
    throw runtime_error("stale artifact " + (run_dir / "folds.csv").string() + ": requirement count differs");
  }
  std::string fold_text = "id,fold\n";
  for (const auto& row : stored_folds) fold_text += row + "\n";
  if (fold_text != folds_csv(p.set, p.folds)) {
    throw runtime_error("stale artifact " + (run_dir / "folds.csv").string() + ": fold split differs from config");
  }

  Phase2Run out{run_phase1(config, p), {}};
  auto& run = out.phase1;
  for (std::size_t f = 0; f < config.n_folds; ++f) {
    auto path = run_dir / "folds" / std::to_string(f) / "candidates.csv";
    auto rows = read_csv_column(path, "id,most_similar,similarity");
    std::string stored = "id,most_similar,similarity\n";
    for (const auto& row : rows) stored += row + "\n";
    if (stored != candidates_csv(run.results[f].candidates)) {
      throw runtime_error("stale artifact " + path.string() + ": candidates differ from a recomputation");
    }
  }

  Phase2Options opts{config.m_count, config.t_o};
  run.report.metadata.emplace_back("m_count", std::to_string(config.m_count));
  run.report.metadata.emplace_back("t_o", format_double(config.t_o));
  run.report.backends = config.ner;

  std::vector<std::string> final_rows(config.n_folds,
                                      "backend,id,decision,ratio,ratio_display,best_match,overlapping_tokens\n");
  for (const auto& backend : config.ner) {
    std::unique_ptr<EntityTagger> tagger;
    try {
      tagger = make_tagger(backend);
    } catch (const Error& e) {
      throw runtime_error("ner backend '" + backend + "' failed to load: " + e.what());
    }
    ProfileCache cache(p.set, *tagger);
    auto& finals = out.finals[backend];
    for (std::size_t f = 0; f < config.n_folds; ++f) {
      const auto& result = run.results[f];
      const auto& m = p.matrices[p.matrix_of_fold[f]];
      auto final = phase2_filter(result.candidates.members, p.set, m, cache, opts);
      Labels predicted;
      for (const auto& id : result.test_ids) predicted[id] = final.contains(id);
      run.report.folds[f].phase2[backend] = confusion(predicted, gold_for(p.set, result.test_ids));
      for (const auto& id : result.candidates.members) {
        const auto& o = final.provenance.at(id);
        final_rows[f] += backend + "," + id + "," + (final.contains(id) ? "conflict" : "dropped") + "," +
                         std::to_string(o.numerator) + "/" + std::to_string(o.denominator) + "," + o.display() + "," +
                         o.best_match + "," + join(o.shared_tokens, " ") + "\n";
      }
      finals.push_back(std::move(final));
    }
  }
  for (std::size_t f = 0; f < config.n_folds; ++f) {
    write_file_atomic(run_dir / "folds" / std::to_string(f) / "final.csv", final_rows[f]);
  }
  write_file_atomic(run_dir / "config.snapshot", config.snapshot());
  render_report(run.report, run_dir);
  return out;
}

bool cmd_validate(const std::string& path, std::ostream& out) {
  if (!fs::exists(path)) throw runtime_error("cannot read '" + path + "': no such file");
  auto diagnostics = validate_requirements(read_file(path));
  for (const auto& d : diagnostics) out << d.to_string() << '\n';
  return diagnostics.empty();
}

TrainNerResult cmd_train_ner(const TrainNerOptions& options) {
  if (options.c1.empty() || options.c2.empty()) throw config_error("c1 and c2 grids must not be empty");
  for (double v : options.c1) {
    if (!(v >= 0)) throw config_error("c1 must be non-negative");
  }
  for (double v : options.c2) {
    if (!(v >= 0)) throw config_error("c2 must be non-negative");
  }
  if (options.model_out.empty()) throw config_error("model output path is not set");
  if (!fs::exists(options.corpus)) throw runtime_error("cannot read '" + options.corpus + "': no such file");

  auto tagset = TagSet::software();
  auto corpus = load_annotated_corpus(options.corpus, tagset);

  TrainNerResult result;
  for (double c1 : options.c1) {
    for (double c2 : options.c2) {
      CrfHyperparams hp{c1, c2, options.max_iterations};
      result.grid.push_back({hp, evaluate_ner(corpus, tagset, hp, options.folds, options.seed)});
    }
  }
  for (std::size_t i = 1; i < result.grid.size(); ++i) {
    if (result.grid[i].evaluation.macro.f1.mean > result.grid[result.best].evaluation.macro.f1.mean) result.best = i;
  }
  const auto& best = result.grid[result.best];
  result.training = train_crf(corpus, tagset, best.hyperparams);

  std::ostringstream metrics;
  metrics << "# CRF entity recognition\n\n";
  metrics << "- corpus: " << fs::path(options.corpus).filename().string() << " (" << corpus.size() << " sentences)\n";
  metrics << "- folds: " << options.folds << ", seed: " << options.seed << '\n';
  metrics << "- selected: c1 = " << format_double(best.hyperparams.c1) << ", c2 = " << format_double(best.hyperparams.c2)
          << ", max_iterations = " << best.hyperparams.max_iterations << '\n';
  metrics << "- optimizer: " << optimize::to_string(result.training.optimizer.status) << " after "
          << result.training.optimizer.iterations << " iterations\n";
  if (result.grid.size() > 1) {
    metrics << "\n## Grid\n\n| c1 | c2 | macro F1 | weighted F1 |\n|---|---|---|---|\n";
    for (const auto& g : result.grid) {
      metrics << "| " << format_double(g.hyperparams.c1) << " | " << format_double(g.hyperparams.c2) << " | "
              << format_fixed(g.evaluation.macro.f1.mean, 4) << " | " << format_fixed(g.evaluation.weighted.f1.mean, 4)
              << " |\n";
    }
  }
  metrics << "\n## Cross-validated scores\n\n" << best.evaluation.to_table();
  result.metrics = metrics.str();

  auto metrics_out = options.metrics_out.empty() ? options.model_out + ".metrics.md" : options.metrics_out;
  write_file_atomic(options.model_out, result.training.model.save());
  write_file_atomic(metrics_out, result.metrics);
  return result;
}

std::vector<std::pair<std::string, std::string>> parse_summary(std::string_view text, const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find(" = ");
    if (eq == std::string::npos || eq == 0) {
      throw runtime_error("corrupt artifact " + origin + ": line " + std::to_string(line_no) + " is not key = value");
    }
    out.emplace_back(line.substr(0, eq), line.substr(eq + 3));
  }
  return out;
}

namespace {

struct SummaryView {
  std::string label;
  std::string origin;
  std::map<std::string, std::string> values;
  std::vector<std::string> backends;

  const std::string& get(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw runtime_error("corrupt artifact " + origin + ": missing key " + key);
    return it->second;
  }
  double num(const std::string& key) const {
    try {
      return parse_double(get(key));
    } catch (const Error& e) {
      if (std::string(e.what()).find("corrupt artifact") != std::string::npos) throw;
      throw runtime_error("corrupt artifact " + origin + ": " + key + " is not a number");
    }
  }
  std::string stat(const std::string& prefix) const {
    return format_stat({num(prefix + ".mean"), num(prefix + ".std")});
  }
};

SummaryView read_summary(const fs::path& dir) {
  auto path = dir / "summary.txt";
  SummaryView view;
  view.label = dir.filename().string();
  if (view.label.empty() || view.label == ".") view.label = fs::absolute(dir).parent_path().filename().string();
  view.origin = path.string();
  for (auto& [k, v] : parse_summary(read_file(path), view.origin)) view.values[k] = v;
  if (auto it = view.values.find("phase2.backends"); it != view.values.end()) view.backends = split_list(it->second);
  if (!fs::exists(dir / "report.md")) throw runtime_error("missing artifact " + (dir / "report.md").string());
  return view;
}

}  // namespace

std::string cmd_report(const std::vector<fs::path>& paths) {
  if (paths.empty()) throw config_error("report needs at least one run directory");
  std::vector<fs::path> runs;
  for (const auto& p : paths) {
    if (!fs::is_directory(p)) throw runtime_error("run directory '" + p.string() + "' does not exist");
    if (fs::exists(p / "summary.txt")) {
      runs.push_back(p);
      continue;
    }
    std::vector<fs::path> children;
    for (const auto& entry : fs::directory_iterator(p)) {
      if (entry.is_directory() && fs::exists(entry.path() / "summary.txt")) children.push_back(entry.path());
    }
    std::sort(children.begin(), children.end());
    if (children.empty()) throw runtime_error("no completed runs under '" + p.string() + "'");
    runs.insert(runs.end(), children.begin(), children.end());
  }

  std::vector<SummaryView> views;
  for (const auto& r : runs) views.push_back(read_summary(r));
  if (views.size() == 1) {
    // Validate before passing the report through.
    (void)views[0].stat("phase1.macro_f1");
    return read_file(runs[0] / "report.md");
  }

  std::ostringstream out;
  out << "# Conflict detection: comparison of " << views.size() << " runs\n\n";
  out << "| Run | Dataset | Embeddings | Stage | Cosine cutoff | F1-score | Change vs Phase I | Recall | Precision | Support |\n";
  out << "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& v : views) {
    out << "| " << v.label << " | " << v.get("dataset") << " | " << v.get("embedding") << " | Phase I | "
        << format_fixed(v.num("delta.mean"), 2) << " | " << v.stat("phase1.macro_f1") << " |  | "
        << v.stat("phase1.macro_recall") << " | " << v.stat("phase1.macro_precision") << " | "
        << format_fixed(v.num("phase1.support.mean"), 2) << " |\n";
    for (const auto& b : v.backends) {
      auto prefix = "phase2." + b;
      out << "| " << v.label << " | " << v.get("dataset") << " | " << v.get("embedding") << " | Phase II (" << b
          << ") |  | " << v.stat(prefix + ".macro_f1") << " | (" << v.get(prefix + ".f1_change") << ") | "
          << v.stat(prefix + ".macro_recall") << " | " << v.stat(prefix + ".macro_precision") << " | "
          << format_fixed(v.num(prefix + ".support.mean"), 2) << " |\n";
    }
  }
  return out.str();
}

void cmd_synth(const std::string& input, const std::string& output, const SynthOptions& options) {
  if (output.empty()) throw config_error("synth needs an output path");
  if (!fs::exists(input)) throw runtime_error("cannot read '" + input + "': no such file");
  auto base = load_requirements(input);
  auto synthetic = generate_synthetic(base, options);
  write_file_atomic(output, serialize_requirements(synthetic));
}

}  // namespace reqconflict
