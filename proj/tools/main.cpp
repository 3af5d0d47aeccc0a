// reqconflict: similarity and entity-overlap conflict detection over
// requirement sets.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "reqconflict/error.hpp"
#include "reqconflict/io.hpp"
#include "reqconflict/pipeline.hpp"
#include "reqconflict/text.hpp"

namespace rc = reqconflict;

namespace {

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

const char* kind_name(rc::ErrorKind kind) {
  switch (kind) {
    case rc::ErrorKind::Validation: return "validation";
    case rc::ErrorKind::Config: return "config";
    case rc::ErrorKind::Runtime: return "runtime";
  }
  return "runtime";
}

int fail(rc::ErrorKind kind, const std::string& message) {
  std::cerr << "error: " << kind_name(kind) << ": " << one_line(message) << '\n';
  return static_cast<int>(kind);
}

std::vector<double> parse_grid(const std::string& name, const std::string& text) {
  std::vector<double> out;
  for (const auto& part : rc::split(text, ',')) {
    auto v = rc::trim(part);
    if (v.empty()) continue;
    try {
      out.push_back(rc::parse_double(v));
    } catch (const rc::Error&) {
      throw rc::config_error(name + " grid entry '" + std::string(v) + "' is not a number");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Requirement conflict detection"};
  app.require_subcommand(1);

  // validate
  auto* validate = app.add_subcommand("validate", "Check a requirements CSV and list every violation");
  std::string validate_path;
  validate->add_option("dataset", validate_path, "Requirements CSV")->required();

  // phase1 / phase2 share the run options
  std::string config_path;
  std::map<std::string, std::string> flags;
  auto add_run_options = [&](CLI::App* cmd, bool phase1) {
    cmd->add_option("-c,--config", config_path, "key = value config file");
    auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
      cmd->add_option_function<std::string>(name, [&flags, key](const std::string& v) { flags[key] = v; }, help);
    };
    if (phase1) {
      flag("--dataset", "dataset", "Requirements CSV");
      flag("--embedding", "embedding", "tfidf | external | fused");
      flag("--external-embeddings", "external_embeddings", "Embedding file(s), comma separated");
      flag("--target-dim", "target_dim", "Fused dimension");
      flag("--folds", "n_folds", "Number of folds");
      flag("--seed", "seed", "Fold seed");
      flag("--objective", "objective", "youden | literal");
      flag("--similarity-scope", "similarity_scope", "global | fold");
      flag("--tfidf-fit", "tfidf_fit", "global | fold");
      flag("--output", "output", "Run directory");
      flag("--dump-matrix", "dump_matrix", "Write the similarity matrix (true | false)");
    }
    flag("--ner", "ner", "general, crf:<model>, file:<corpus>; comma separated");
    flag("--m-count", "m_count", "Neighbours compared in Phase II");
    flag("--t-o", "t_o", "Overlap threshold");
  };

  auto* phase1 = app.add_subcommand("phase1", "Similarity thresholding with cross-validated cutoffs");
  add_run_options(phase1, true);

  auto* phase2 = app.add_subcommand("phase2", "Entity-overlap filtering of Phase I candidates");
  std::string run_dir;
  phase2->add_option("run", run_dir, "Run directory written by phase1")->required();
  add_run_options(phase2, false);

  // train-ner
  auto* train = app.add_subcommand("train-ner", "Train the CRF entity recogniser");
  rc::TrainNerOptions train_opts;
  std::string c1_grid = "0.1", c2_grid = "0.1";
  train->add_option("corpus", train_opts.corpus, "Annotated corpus (token<TAB>label)")->required();
  train->add_option("-o,--output", train_opts.model_out, "Model file")->required();
  train->add_option("--metrics", train_opts.metrics_out, "Metrics table (default <model>.metrics.md)");
  train->add_option("--c1", c1_grid, "L1 weight(s), comma separated");
  train->add_option("--c2", c2_grid, "L2 weight(s), comma separated");
  train->add_option("--max-iterations", train_opts.max_iterations, "Optimizer iterations");
  train->add_option("--folds", train_opts.folds, "Cross-validation folds");
  train->add_option("--seed", train_opts.seed, "Fold shuffle seed");

  // report
  auto* report = app.add_subcommand("report", "Merge run summaries into one table");
  std::vector<std::string> report_dirs;
  std::string report_out;
  report->add_option("runs", report_dirs, "Run directories or a directory of runs")->required();
  report->add_option("-o,--output", report_out, "Write here instead of stdout");

  // synth
  auto* synth = app.add_subcommand("synth", "Plant synthetic conflicts into a requirement set");
  std::string synth_in, synth_out;
  rc::SynthOptions synth_opts;
  synth->add_option("input", synth_in, "Base requirements CSV")->required();
  synth->add_option("-o,--output", synth_out, "Output CSV")->required();
  synth->add_option("--conflicts", synth_opts.n_conflicts, "Perturbed copies");
  synth->add_option("--duplicates", synth_opts.n_duplicates, "Verbatim copies");
  synth->add_option("--seed", synth_opts.seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(rc::ErrorKind::Config, e.what());
  }

  try {
    if (*validate) {
      return rc::cmd_validate(validate_path, std::cout) ? 0 : static_cast<int>(rc::ErrorKind::Validation);
    }
    if (*phase1) {
      auto config = config_path.empty() ? rc::RunConfig{} : rc::RunConfig::load(config_path);
      for (const auto& [k, v] : flags) config.set(k, v);
      auto run = rc::cmd_phase1(config);
      std::cout << config.output_dir().string() << '\n';
      for (std::size_t f = 0; f < run.results.size(); ++f) {
        std::cout << "fold " << f << ": cutoff " << rc::format_fixed(run.results[f].selection.delta, 2) << ", "
                  << run.results[f].candidates.members.size() << " candidates\n";
      }
      return 0;
    }
    if (*phase2) {
      if (!config_path.empty()) {
        auto file = rc::read_file(config_path);
        auto parsed = rc::RunConfig::parse(file);
        // Only the Phase II keys are taken from a config file here.
        flags.try_emplace("m_count", std::to_string(parsed.m_count));
        flags.try_emplace("t_o", rc::format_double(parsed.t_o));
        std::string ner;
        for (const auto& b : parsed.ner) ner += (ner.empty() ? "" : ",") + b;
        flags.try_emplace("ner", ner);
      }
      auto run = rc::cmd_phase2(run_dir, flags);
      for (const auto& [backend, finals] : run.finals) {
        std::size_t kept = 0;
        for (const auto& f : finals) kept += f.members.size();
        std::cout << backend << ": " << kept << " conflicts kept\n";
      }
      return 0;
    }
    if (*train) {
      train_opts.c1 = parse_grid("c1", c1_grid);
      train_opts.c2 = parse_grid("c2", c2_grid);
      auto result = rc::cmd_train_ner(train_opts);
      std::cout << result.metrics;
      return 0;
    }
    if (*report) {
      std::vector<std::filesystem::path> dirs(report_dirs.begin(), report_dirs.end());
      auto text = rc::cmd_report(dirs);
      if (report_out.empty()) {
        std::cout << text;
      } else {
        rc::write_file_atomic(report_out, text);
      }
      return 0;
    }
    if (*synth) {
      rc::cmd_synth(synth_in, synth_out, synth_opts);
      return 0;
    }
  } catch (const rc::Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail(rc::ErrorKind::Runtime, e.what());
  }
  return 0;
}
