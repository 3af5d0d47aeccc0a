#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "reqconflict/error.hpp"
#include "reqconflict/pipeline.hpp"

namespace py = pybind11;
namespace rc = reqconflict;

namespace {

py::dict requirement_dict(const rc::Requirement& r) {
  py::dict d;
  d["id"] = r.id;
  d["text"] = r.text;
  d["conflict"] = r.gold_conflict;
  d["partners"] = r.partners;
  return d;
}

rc::RunConfig config_from(const py::dict& options) {
  rc::RunConfig config;
  for (const auto& [k, v] : options) config.set(py::str(k), py::str(v));
  return config;
}

std::vector<std::pair<std::string, std::string>> span_pairs(const std::vector<rc::EntitySpan>& spans) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : spans) out.emplace_back(s.type, s.surface);
  return out;
}

}  // namespace

PYBIND11_MODULE(_reqconflict, m) {
  m.doc() = "Requirement conflict detection: similarity thresholding and entity-overlap filtering";

  static PyObject* error_type = PyErr_NewException("reqconflict._reqconflict.ReqConflictError", PyExc_RuntimeError, nullptr);
  m.attr("ReqConflictError") = py::handle(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const rc::Error& e) {
      static const char* kinds[] = {"", "validation", "config", "runtime"};
      std::string msg = std::string(kinds[static_cast<int>(e.kind())]) + ": " + e.what();
      PyErr_SetString(error_type, msg.c_str());
    }
  });

  py::class_<rc::RequirementSet>(m, "RequirementSet")
      .def_property_readonly("name", &rc::RequirementSet::name)
      .def("__len__", &rc::RequirementSet::size)
      .def("ids", &rc::RequirementSet::ids)
      .def("gold_labels", &rc::RequirementSet::gold_labels)
      .def("requirements", [](const rc::RequirementSet& s) {
        py::list out;
        for (const auto& r : s.requirements()) out.append(requirement_dict(r));
        return out;
      })
      .def("to_csv", &rc::serialize_requirements);

  m.def("load_requirements", &rc::load_requirements, py::arg("path"));
  m.def("parse_requirements", &rc::parse_requirements, py::arg("csv"), py::arg("name") = "dataset");
  m.def(
      "validate_requirements",
      [](const std::string& csv) {
        std::vector<std::pair<std::size_t, std::string>> out;
        for (const auto& d : rc::validate_requirements(csv)) out.emplace_back(d.row, d.message);
        return out;
      },
      py::arg("csv"), "List of (row, message); empty when the file is clean.");
  m.def(
      "make_folds",
      [](const rc::RequirementSet& set, std::size_t n_folds, std::uint64_t seed) {
        return rc::make_folds(set, n_folds, seed).assignment;
      },
      py::arg("requirements"), py::arg("n_folds") = 3, py::arg("seed") = 0);
  m.def(
      "generate_synthetic",
      [](const rc::RequirementSet& set, std::size_t conflicts, std::size_t duplicates, std::uint64_t seed) {
        return rc::generate_synthetic(set, {conflicts, duplicates, seed});
      },
      py::arg("requirements"), py::arg("conflicts"), py::arg("duplicates") = 0, py::arg("seed") = 0);

  py::class_<rc::TfidfModel>(m, "TfidfModel")
      .def_static("fit", py::overload_cast<const std::vector<std::string>&>(&rc::TfidfModel::fit), py::arg("documents"))
      .def_property_readonly("terms", &rc::TfidfModel::terms)
      .def("idf", py::overload_cast<std::string_view>(&rc::TfidfModel::idf, py::const_), py::arg("term"))
      .def("embed", [](const rc::TfidfModel& model, const std::string& text) { return model.embed(text).values(); },
           py::arg("text"));

  m.def(
      "cosine",
      [](const std::vector<double>& u, const std::vector<double>& v) {
        return rc::cosine(std::span<const double>(u), std::span<const double>(v));
      },
      py::arg("u"), py::arg("v"));
  m.def(
      "similarity_matrix",
      [](const rc::RequirementSet& set) {
        auto matrix = rc::pairwise_matrix(rc::TfidfModel::fit(set).embed_all(set));
        std::vector<std::vector<double>> rows(matrix.size(), std::vector<double>(matrix.size()));
        for (std::size_t i = 0; i < matrix.size(); ++i) {
          for (std::size_t j = 0; j < matrix.size(); ++j) rows[i][j] = matrix(i, j);
        }
        return py::make_tuple(matrix.ids(), rows);
      },
      py::arg("requirements"), "TF-IDF cosine similarities: (ids, rows).");

  m.def(
      "select_cutoff",
      [](const std::vector<std::tuple<double, double, double>>& points, const std::string& objective) {
        std::vector<rc::RocPoint> pts;
        for (const auto& [k, tpr, fpr] : points) pts.push_back({k, tpr, fpr});
        if (objective != "youden" && objective != "literal") throw rc::config_error("objective must be youden or literal");
        auto sel = rc::select_cutoff(pts, objective == "youden" ? rc::Objective::Youden : rc::Objective::Literal);
        return py::make_tuple(sel.delta, sel.objective);
      },
      py::arg("points"), py::arg("objective") = "youden", "Points are (k, tpr, fpr); returns (delta, objective).");

  m.def(
      "tag_general",
      [](const std::string& text) { return span_pairs(rc::GeneralTagger{}.tag("", rc::tokenize(text))); },
      py::arg("text"), "Noun and Verb entities as (type, surface) pairs.");
  m.def("tokenize", [](const std::string& text) {
    std::vector<std::string> out;
    for (const auto& t : rc::tokenize(text)) out.push_back(t.surface);
    return out;
  });
  m.def("overlap_ratio", [](const std::vector<std::pair<std::string, std::string>>& candidate,
                            const std::vector<std::vector<std::pair<std::string, std::string>>>& neighbors) {
        // Entities given as (token, type).
        auto profile = [](const std::string& id, const std::vector<std::pair<std::string, std::string>>& ents) {
          rc::EntityProfile p{id, {}};
          for (const auto& [token, type] : ents) p.entities.insert({rc::to_lower(token), type});
          return p;
        };
        std::vector<rc::EntityProfile> ns;
        for (std::size_t i = 0; i < neighbors.size(); ++i) ns.push_back(profile(std::to_string(i), neighbors[i]));
        auto r = rc::overlap_ratio(profile("c", candidate), ns);
        return py::make_tuple(r.numerator, r.denominator, r.display());
      }, py::arg("candidate"), py::arg("neighbors"),
        "(max overlap, unique candidate entities, truncated display) over (token, type) entity lists.");

  py::class_<rc::CrfModel>(m, "CrfModel")
      .def_static("load", &rc::CrfModel::load_file, py::arg("path"))
      .def("save", &rc::CrfModel::save)
      .def("tag", [](const rc::CrfModel& model, const std::string& text) { return model.decode(rc::tokenize(text)); },
           py::arg("text"));
  m.def(
      "train_crf",
      [](const std::string& corpus_path, double c1, double c2, std::size_t max_iterations) {
        auto tagset = rc::TagSet::software();
        auto corpus = rc::load_annotated_corpus(corpus_path, tagset);
        return rc::train_crf(corpus, tagset, {c1, c2, max_iterations}).model;
      },
      py::arg("corpus"), py::arg("c1") = 0.1, py::arg("c2") = 0.1, py::arg("max_iterations") = 100);

  m.def("format_delta", &rc::format_delta, py::arg("before"), py::arg("after"));

  m.def(
      "run_phase1",
      [](const py::dict& options) {
        auto config = config_from(options);
        auto run = rc::cmd_phase1(config);
        std::vector<std::vector<std::string>> candidates;
        for (const auto& r : run.results) candidates.push_back(r.candidates.members);
        return py::make_tuple(config.output_dir(), candidates);
      },
      py::arg("options"), "Keys as in the run config file. Returns (run dir, candidates per fold).");
  m.def(
      "run_phase2",
      [](const std::filesystem::path& run_dir, const std::map<std::string, std::string>& overrides) {
        auto run = rc::cmd_phase2(run_dir, overrides);
        std::map<std::string, std::vector<std::vector<std::string>>> out;
        for (const auto& [backend, finals] : run.finals) {
          for (const auto& f : finals) out[backend].push_back(f.members);
        }
        return out;
      },
      py::arg("run_dir"), py::arg("overrides") = std::map<std::string, std::string>{});
  m.def("report", &rc::cmd_report, py::arg("runs"));
}
