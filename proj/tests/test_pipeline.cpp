#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include "reqconflict/error.hpp"
#include "reqconflict/io.hpp"
#include "reqconflict/pipeline.hpp"
#include "support.hpp"

using namespace reqconflict;
namespace fs = std::filesystem;

namespace {

RunConfig synthetic_config(const fs::path& out) {
  RunConfig c;
  c.dataset = testing::data_path("synthetic_uav.csv");
  c.seed = 7;
  c.output = out.string();
  return c;
}

// Relative path -> contents for every file under `root`.
std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file(e.path());
  }
  return out;
}

struct CliResult {
  int code;
  std::string out, err;
};

#ifdef REQCONFLICT_CLI
CliResult run_cli(const std::string& args, const testing::TempDir& tmp) {
  auto out = tmp / "stdout.txt", err = tmp / "stderr.txt";
  std::string cmd = std::string(REQCONFLICT_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(out), read_file(err)};
}
#endif

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config text parsing") {
  auto c = RunConfig::parse(
      "# comment\n"
      "dataset = data/x.csv\n"
      "embedding = fused   # trailing comment\n"
      "external_embeddings = a.ndjson\n"
      "target_dim = 16\n"
      "ner = general, crf:m.crf\n"
      "t_o = 0.5\n"
      "objective = literal\n");
  CHECK(c.dataset == "data/x.csv");
  CHECK(c.embedding == EmbeddingScheme::Fused);
  CHECK(c.target_dim == 16);
  CHECK(c.ner == std::vector<std::string>{"general", "crf:m.crf"});
  CHECK(c.t_o == 0.5);
  CHECK(c.objective == Objective::Literal);
  CHECK(c.n_folds == 3);
  CHECK(c.m_count == 5);

  CHECK(RunConfig::parse(c.snapshot()).snapshot() == c.snapshot());
}

TEST_CASE("config errors") {
  auto kind_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Runtime;
  };
  CHECK(kind_of([] { RunConfig::parse("unknown_key = 1\n"); }) == ErrorKind::Config);
  CHECK(kind_of([] { RunConfig::parse("n_folds = three\n"); }) == ErrorKind::Config);
  CHECK(kind_of([] { RunConfig::parse("just words\n"); }) == ErrorKind::Config);

  RunConfig c;
  c.dataset = testing::data_path("synthetic_uav.csv");
  c.embedding = EmbeddingScheme::External;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Config);
  c.embedding = EmbeddingScheme::Tfidf;
  c.n_folds = 1;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Config);
  c.n_folds = 3;
  c.t_o = 1.5;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Config);
  c.t_o = 1.0;
  c.ner = {"spacy"};
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Config);
  c.ner = {"general"};
  c.dataset = "/nonexistent/file.csv";
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Config);
}

TEST_CASE("output root from the environment") {
  RunConfig c;
  c.dataset = "some/dir/uav.csv";
  ::setenv("REQCONFLICT_OUTPUT_ROOT", "/tmp/rc-root", 1);
  CHECK(c.output_dir() == fs::path("/tmp/rc-root/uav"));
  ::unsetenv("REQCONFLICT_OUTPUT_ROOT");
  CHECK(c.output_dir() == fs::path("runs/uav"));
  c.output = "elsewhere";
  CHECK(c.output_dir() == fs::path("elsewhere"));
}

TEST_CASE("phase1 writes the run layout and is reproducible") {
  testing::TempDir a, b;
  auto run = cmd_phase1(synthetic_config(a.path()));
  for (std::size_t f = 0; f < 3; ++f) {
    auto dir = a.path() / "folds" / std::to_string(f);
    CHECK(fs::exists(dir / "roc.csv"));
    CHECK(fs::exists(dir / "candidates.csv"));
    CHECK(fs::exists(dir / "confusion.csv"));
  }
  CHECK(fs::exists(a / "summary.txt"));
  CHECK(fs::exists(a / "config.snapshot"));
  CHECK(fs::exists(a / "folds.csv"));
  CHECK(run.results.size() == 3);

  cmd_phase1(synthetic_config(b.path()));
  auto ta = snapshot_tree(a.path()), tb = snapshot_tree(b.path());
  ta.erase("config.snapshot");  // records its own output directory
  tb.erase("config.snapshot");
  CHECK(ta == tb);
}

TEST_CASE("every planted duplicate pair becomes a candidate") {
  testing::TempDir tmp;
  auto run = cmd_phase1(synthetic_config(tmp.path()));
  std::size_t duplicates = 0;
  for (const auto& r : run.set.requirements()) {
    for (const auto& p : r.partners) {
      if (run.set.at(p).text != r.text) continue;
      ++duplicates;
      auto fold = run.folds.assignment.at(r.id);
      CHECK(run.results[fold].candidates.contains(r.id));
    }
  }
  CHECK(duplicates == 6);  // three pairs, counted from both sides
}

TEST_CASE("fused scheme records target_dim") {
  testing::TempDir tmp;
  auto c = synthetic_config(tmp.path());
  c.embedding = EmbeddingScheme::Fused;
  c.external_embeddings = testing::data_path("fixtures/synthetic_uav_hash32.ndjson");
  c.target_dim = 16;
  auto run = cmd_phase1(c);
  auto summary = read_file(tmp / "summary.txt");
  CHECK(summary.find("target_dim = 16\n") != std::string::npos);
  CHECK(summary.find("embedding = fused\n") != std::string::npos);
  CHECK(summary.find("embedding_dim = 16\n") != std::string::npos);
}

TEST_CASE("external scheme with a mismatched id set fails") {
  testing::TempDir tmp;
  auto c = synthetic_config(tmp.path());
  c.embedding = EmbeddingScheme::External;
  c.external_embeddings = testing::data_path("fixtures/tiny_a.ndjson");
  CHECK_THROWS_AS(cmd_phase1(c), Error);
}

TEST_CASE("phase2 after phase1") {
  testing::TempDir tmp;
  auto p1 = cmd_phase1(synthetic_config(tmp.path()));

  SUBCASE("t_o = 0 keeps every candidate") {
    auto p2 = cmd_phase2(tmp.path(), {{"t_o", "0"}});
    for (std::size_t f = 0; f < 3; ++f) {
      CHECK(p2.finals.at("general")[f].members == p1.results[f].candidates.members);
    }
  }
  SUBCASE("t_o = 1 keeps duplicates and stays inside the candidates") {
    auto p2 = cmd_phase2(tmp.path());
    for (std::size_t f = 0; f < 3; ++f) {
      const auto& final = p2.finals.at("general")[f];
      const auto& cands = p1.results[f].candidates;
      for (const auto& id : final.members) CHECK(cands.contains(id));
      for (const auto& id : cands.members) {
        const auto& r = p1.set.at(id);
        bool duplicated = false;
        for (const auto& p : r.partners) duplicated = duplicated || p1.set.at(p).text == r.text;
        if (duplicated) CHECK(final.contains(id));
      }
    }
    auto final_csv = read_file(tmp.path() / "folds" / "0" / "final.csv");
    CHECK(final_csv.rfind("backend,id,decision,ratio,ratio_display,best_match,overlapping_tokens\n", 0) == 0);
    CHECK(fs::exists(tmp.path() / "folds" / "0" / "confusion_phase2_general.csv"));
  }
  SUBCASE("two backends give two report rows") {
    testing::TempDir models;
    auto corpus = load_annotated_corpus(testing::data_path("ner_toy.tsv"), TagSet::software());
    write_file_atomic(models / "toy.crf", train_crf(corpus, TagSet::software()).model.save());
    cmd_phase2(tmp.path(), {{"ner", "general,crf:" + (models / "toy.crf").string()}});
    auto md = read_file(tmp / "report.md");
    CHECK(md.find("| " + p1.set.name() + " | general |") != std::string::npos);
    CHECK(md.find("| " + p1.set.name() + " | crf:") != std::string::npos);
  }
  SUBCASE("phase2 is reproducible") {
    cmd_phase2(tmp.path());
    auto first = snapshot_tree(tmp.path());
    cmd_phase2(tmp.path());
    CHECK(snapshot_tree(tmp.path()) == first);
  }
  SUBCASE("tampered candidates are detected") {
    write_file_atomic(tmp.path() / "folds" / "1" / "candidates.csv", "id,most_similar,similarity\n");
    CHECK_THROWS_AS(cmd_phase2(tmp.path()), Error);
  }
  SUBCASE("missing artifacts are named") {
    fs::remove(tmp.path() / "folds.csv");
    try {
      cmd_phase2(tmp.path());
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("folds.csv") != std::string::npos);
    }
  }
}

TEST_CASE("report merging") {
  testing::TempDir root;
  auto a = synthetic_config(root / "tfidf");
  cmd_phase1(a);
  cmd_phase2(root / "tfidf");

  SUBCASE("one run passes its report through") {
    CHECK(cmd_report({root / "tfidf"}) == read_file(root / "tfidf" / "report.md"));
  }
  SUBCASE("two embeddings give one comparative table") {
    auto b = synthetic_config(root / "fused");
    b.embedding = EmbeddingScheme::Fused;
    b.external_embeddings = testing::data_path("fixtures/synthetic_uav_hash32.ndjson");
    b.target_dim = 16;
    cmd_phase1(b);
    auto text = cmd_report({root.path()});
    CHECK(text.find("| fused | synthetic_uav | fused | Phase I |") != std::string::npos);
    CHECK(text.find("| tfidf | synthetic_uav | tfidf | Phase I |") != std::string::npos);
    CHECK(text.find("| tfidf | synthetic_uav | tfidf | Phase II (general) |") != std::string::npos);
  }
  SUBCASE("corrupt summary is a named error") {
    testing::TempDir other;
    cmd_phase1(synthetic_config(other / "x"));
    write_file_atomic(other / "x" / "summary.txt", "dataset = d\nthis line is broken\n");
    try {
      cmd_report({other / "x", root / "tfidf"});
      FAIL("expected an error");
    } catch (const Error& e) {
      std::string msg = e.what();
      CHECK(msg.find("corrupt artifact") != std::string::npos);
      CHECK(msg.find("summary.txt") != std::string::npos);
    }
  }
  SUBCASE("empty directory") {
    testing::TempDir empty;
    CHECK_THROWS_AS(cmd_report({empty.path()}), Error);
  }
}

TEST_CASE("train-ner grid search picks the best macro F1") {
  testing::TempDir tmp;
  TrainNerOptions opts;
  opts.corpus = testing::data_path("ner_toy.tsv");
  opts.model_out = (tmp / "m.crf").string();
  opts.c1 = {0.1, 1.0};
  opts.c2 = {0.1, 1.0};
  opts.max_iterations = 40;
  auto result = cmd_train_ner(opts);
  REQUIRE(result.grid.size() == 4);

  auto corpus = load_annotated_corpus(opts.corpus, TagSet::software());
  std::size_t best = 0;
  double best_f1 = -1;
  std::size_t k = 0;
  for (double c1 : opts.c1) {
    for (double c2 : opts.c2) {
      auto eval = evaluate_ner(corpus, TagSet::software(), {c1, c2, 40}, 5, 0);
      CHECK(result.grid[k].hyperparams == CrfHyperparams{c1, c2, 40});
      if (eval.macro.f1.mean > best_f1) best_f1 = eval.macro.f1.mean, best = k;
      ++k;
    }
  }
  CHECK(result.best == best);
  CHECK(fs::exists(tmp / "m.crf"));
  CHECK(fs::exists(tmp / "m.crf.metrics.md"));
  CHECK(CrfModel::load_file((tmp / "m.crf").string()).hyperparams() == result.grid[best].hyperparams);
}

TEST_CASE("train-ner reports bad labels with a line number") {
  testing::TempDir tmp;
  write_file_atomic(tmp / "bad.tsv", "The\tB-Actor\nUAV\tB-Drone\n");
  TrainNerOptions opts;
  opts.corpus = (tmp / "bad.tsv").string();
  opts.model_out = (tmp / "m.crf").string();
  try {
    cmd_train_ner(opts);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("validate command") {
  std::ostringstream out;
  CHECK(cmd_validate(testing::data_path("synthetic_uav.csv"), out));
  CHECK(out.str().empty());
  CHECK_THROWS_AS(cmd_validate("/nonexistent.csv", out), Error);
}

#ifdef REQCONFLICT_CLI
TEST_CASE("command-line exit codes and error lines") {
  testing::TempDir tmp;
  write_file_atomic(tmp / "asym.csv", "id,text,conflict,conflict_label\n1,first,Yes,Yes (2)\n2,second,No,No\n");

  auto clean = run_cli("validate " + testing::data_path("synthetic_uav.csv"), tmp);
  CHECK(clean.code == 0);

  auto asym = run_cli("validate " + (tmp / "asym.csv").string(), tmp);
  CHECK(asym.code == 1);
  CHECK(asym.out.find("row 2") != std::string::npos);
  CHECK(asym.out.find("row 3") != std::string::npos);

  auto missing = run_cli("validate " + (tmp / "nope.csv").string(), tmp);
  CHECK(missing.code == 3);
  CHECK(missing.err.rfind("error: runtime: ", 0) == 0);
  CHECK(std::count(missing.err.begin(), missing.err.end(), '\n') == 1);

  auto config = run_cli("phase1 --dataset " + testing::data_path("synthetic_uav.csv") + " --embedding external", tmp);
  CHECK(config.code == 2);
  CHECK(config.err.rfind("error: config: ", 0) == 0);

  auto unknown = run_cli("phase1 --bogus", tmp);
  CHECK(unknown.code == 2);

  auto out = (tmp / "run").string();
  auto p1 = run_cli("phase1 --dataset " + testing::data_path("synthetic_uav.csv") + " --seed 7 --output " + out, tmp);
  CHECK(p1.code == 0);
  auto p2 = run_cli("phase2 " + out + " --t-o 1", tmp);
  CHECK(p2.code == 0);
  auto rep = run_cli("report " + out, tmp);
  CHECK(rep.code == 0);
  CHECK(rep.out == read_file(tmp / "run" / "report.md"));

  auto synth = run_cli("synth " + testing::data_path("uav_base.csv") + " --conflicts 9 --duplicates 3 --seed 7 -o " +
                           (tmp / "s.csv").string(),
                       tmp);
  CHECK(synth.code == 0);
  CHECK(read_file(tmp / "s.csv") == read_file(testing::data_path("synthetic_uav.csv")));
}
#endif

}
