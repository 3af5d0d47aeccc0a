#include "reqconflict/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "embedded_perturbations.hpp"
#include "reqconflict/error.hpp"
#include "reqconflict/text.hpp"

namespace reqconflict {
namespace {

struct CsvRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// RFC 4180 with two leniencies: whitespace around fields is ignored outside
// quotes, and a bare CR before LF is dropped.
std::vector<CsvRecord> read_csv(std::string_view text, std::vector<Diagnostic>& diags) {
  std::vector<CsvRecord> records;
  std::size_t line = 1;
  std::size_t i = 0;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;

  while (i < text.size()) {
    CsvRecord rec;
    rec.line = line;
    bool record_done = false;
    while (!record_done) {
      std::string field;
      while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
      if (i < text.size() && text[i] == '"') {
        ++i;
        bool closed = false;
        while (i < text.size()) {
          char c = text[i++];
          if (c == '"') {
            if (i < text.size() && text[i] == '"') {
              field.push_back('"');
              ++i;
            } else {
              closed = true;
              break;
            }
          } else {
            if (c == '\n') ++line;
            field.push_back(c);
          }
        }
        if (!closed) diags.push_back({rec.line, "unterminated quoted field"});
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\r')) ++i;
        if (i < text.size() && text[i] != ',' && text[i] != '\n') {
          diags.push_back({rec.line, "unexpected character after quoted field"});
          while (i < text.size() && text[i] != ',' && text[i] != '\n') ++i;
        }
      } else {
        while (i < text.size() && text[i] != ',' && text[i] != '\n') field.push_back(text[i++]);
        field = std::string(trim(field));
      }
      rec.fields.push_back(std::move(field));
      if (i >= text.size()) {
        record_done = true;
      } else if (text[i] == ',') {
        ++i;
      } else {  // '\n'
        ++i;
        ++line;
        record_done = true;
      }
    }
    bool blank = rec.fields.size() == 1 && rec.fields[0].empty();
    if (!blank) records.push_back(std::move(rec));
  }
  return records;
}

std::string csv_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

bool iequals(std::string_view a, std::string_view b) { return to_lower(a) == to_lower(b); }

// "No" -> {}, "Yes (2)" -> {"2"}, "Yes (2, 5)" -> {"2","5"}.
std::optional<std::vector<std::string>> parse_label(std::string_view cell, bool& yes) {
  cell = trim(cell);
  if (iequals(cell, "no")) {
    yes = false;
    return std::vector<std::string>{};
  }
  if (cell.size() < 3 || !iequals(cell.substr(0, 3), "yes")) return std::nullopt;
  auto rest = trim(cell.substr(3));
  if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')') return std::nullopt;
  std::vector<std::string> ids;
  for (auto& part : split(rest.substr(1, rest.size() - 2), ',')) {
    auto id = std::string(trim(part));
    if (id.empty()) return std::nullopt;
    ids.push_back(std::move(id));
  }
  yes = true;
  return ids;
}

std::vector<Requirement> rows_to_requirements(const std::vector<CsvRecord>& records,
                                              std::vector<std::size_t>& rows,
                                              std::vector<Diagnostic>& diags) {
  std::vector<Requirement> out;
  if (records.empty()) {
    diags.push_back({0, "missing header row"});
    return out;
  }
  const auto& header = records.front();
  static const std::vector<std::string> expected{"id", "text", "conflict", "conflict_label"};
  bool header_ok = header.fields.size() == expected.size();
  for (std::size_t k = 0; header_ok && k < expected.size(); ++k) {
    header_ok = iequals(trim(header.fields[k]), expected[k]);
  }
  if (!header_ok) {
    diags.push_back({header.line, "header must be id,text,conflict,conflict_label"});
    return out;
  }

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != 4) {
      diags.push_back({rec.line, "expected 4 fields, found " + std::to_string(rec.fields.size())});
      continue;
    }
    Requirement req;
    req.id = std::string(trim(rec.fields[0]));
    req.text = std::string(trim(rec.fields[1]));
    auto conflict = trim(rec.fields[2]);
    bool conflict_yes = false;
    if (iequals(conflict, "yes")) {
      conflict_yes = true;
    } else if (!iequals(conflict, "no")) {
      diags.push_back({rec.line, "conflict must be Yes or No, got '" + std::string(conflict) + "'"});
      continue;
    }
    bool label_yes = false;
    auto partners = parse_label(rec.fields[3], label_yes);
    if (!partners) {
      diags.push_back({rec.line, "malformed conflict_label '" + std::string(trim(rec.fields[3])) +
                                     "' (expected No or Yes (id[,id]*))"});
      continue;
    }
    if (label_yes != conflict_yes) {
      diags.push_back({rec.line, "conflict column disagrees with conflict_label"});
      continue;
    }
    req.gold_conflict = label_yes;
    req.partners = std::move(*partners);
    out.push_back(std::move(req));
    rows.push_back(rec.line);
  }
  return out;
}

}  // namespace

std::string Diagnostic::to_string() const {
  if (row == 0) return message;
  return "row " + std::to_string(row) + ": " + message;
}

std::vector<Diagnostic> check_requirements(const std::vector<Requirement>& reqs,
                                           const std::vector<std::size_t>& rows) {
  std::vector<Diagnostic> diags;
  auto row_of = [&](std::size_t i) { return i < rows.size() ? rows[i] : i + 2; };
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    const auto& r = reqs[i];
    if (r.id.empty()) diags.push_back({row_of(i), "empty id"});
    if (trim(r.text).empty()) diags.push_back({row_of(i), "empty text for id " + r.id});
    if (r.gold_conflict != !r.partners.empty()) {
      diags.push_back({row_of(i), "id " + r.id + ": conflict flag and partner list disagree"});
    }
    auto [it, inserted] = index.emplace(r.id, i);
    if (!inserted) {
      diags.push_back({row_of(i), "duplicate id " + r.id + " (first at row " +
                                      std::to_string(row_of(it->second)) + ")"});
    }
  }
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    const auto& r = reqs[i];
    std::set<std::string> seen;
    for (const auto& p : r.partners) {
      if (!seen.insert(p).second) {
        diags.push_back({row_of(i), "id " + r.id + " lists partner " + p + " twice"});
        continue;
      }
      if (p == r.id) {
        diags.push_back({row_of(i), "id " + r.id + " lists itself as a partner"});
        continue;
      }
      auto it = index.find(p);
      if (it == index.end()) {
        diags.push_back({row_of(i), "id " + r.id + " lists unknown partner " + p});
        continue;
      }
      const auto& other = reqs[it->second];
      if (std::find(other.partners.begin(), other.partners.end(), r.id) == other.partners.end()) {
        diags.push_back({row_of(i), "asymmetric conflict: row " + std::to_string(row_of(i)) + " (id " +
                                        r.id + ") lists " + p + " but row " +
                                        std::to_string(row_of(it->second)) + " (id " + p +
                                        ") does not list " + r.id});
      }
    }
  }
  return diags;
}

std::vector<Diagnostic> validate_requirements(std::string_view csv) {
  std::vector<Diagnostic> diags;
  auto records = read_csv(csv, diags);
  std::vector<std::size_t> rows;
  auto reqs = rows_to_requirements(records, rows, diags);
  auto more = check_requirements(reqs, rows);
  diags.insert(diags.end(), more.begin(), more.end());
  return diags;
}

RequirementSet RequirementSet::make(std::string name, std::vector<Requirement> requirements) {
  for (auto& r : requirements) r.text = std::string(trim(r.text));
  auto diags = check_requirements(requirements);
  if (!diags.empty()) throw validation_error(diags.front().to_string());
  RequirementSet set;
  set.name_ = std::move(name);
  set.requirements_ = std::move(requirements);
  for (std::size_t i = 0; i < set.requirements_.size(); ++i) set.index_.emplace(set.requirements_[i].id, i);
  return set;
}

RequirementSet parse_requirements(std::string_view csv, std::string name) {
  std::vector<Diagnostic> diags;
  auto records = read_csv(csv, diags);
  std::vector<std::size_t> rows;
  auto reqs = rows_to_requirements(records, rows, diags);
  auto more = check_requirements(reqs, rows);
  diags.insert(diags.end(), more.begin(), more.end());
  if (!diags.empty()) {
    std::string msg = diags.front().to_string();
    if (diags.size() > 1) msg += " (+" + std::to_string(diags.size() - 1) + " more)";
    throw validation_error(msg);
  }
  return RequirementSet::make(std::move(name), std::move(reqs));
}

std::string serialize_requirements(const RequirementSet& set) {
  std::ostringstream out;
  out << "id,text,conflict,conflict_label\n";
  for (const auto& r : set.requirements()) {
    bool needs_quote = r.id.find_first_of(",\"\n") != std::string::npos;
    out << (needs_quote ? csv_quote(r.id) : r.id) << ',' << csv_quote(r.text) << ','
        << (r.gold_conflict ? "Yes" : "No") << ',';
    if (!r.gold_conflict) {
      out << "No";
    } else {
      std::string label = "Yes (";
      for (std::size_t k = 0; k < r.partners.size(); ++k) {
        if (k) label += ',';
        label += r.partners[k];
      }
      label += ')';
      out << (label.find(',') != std::string::npos ? csv_quote(label) : label);
    }
    out << '\n';
  }
  return out.str();
}

RequirementSet load_requirements(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw runtime_error("cannot read dataset '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
  if (auto dot = name.find_last_of('.'); dot != std::string::npos && dot > 0) name = name.substr(0, dot);
  return parse_requirements(buf.str(), name);
}

const Requirement& RequirementSet::at(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw validation_error("unknown requirement id " + std::string(id));
  return requirements_[it->second];
}

std::optional<std::size_t> RequirementSet::index_of(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> RequirementSet::ids() const {
  std::vector<std::string> out;
  out.reserve(requirements_.size());
  for (const auto& r : requirements_) out.push_back(r.id);
  return out;
}

std::map<std::string, bool> RequirementSet::gold_labels() const {
  std::map<std::string, bool> out;
  for (const auto& r : requirements_) out.emplace(r.id, r.gold_conflict);
  return out;
}

// ---------------------------------------------------------------------------
// Folds

std::vector<std::string> FoldAssignment::ids_in(std::size_t fold, const RequirementSet& order) const {
  std::vector<std::string> out;
  for (const auto& r : order.requirements()) {
    auto it = assignment.find(r.id);
    if (it != assignment.end() && it->second == fold) out.push_back(r.id);
  }
  return out;
}

std::vector<std::string> FoldAssignment::ids_outside(std::size_t fold, const RequirementSet& order) const {
  std::vector<std::string> out;
  for (const auto& r : order.requirements()) {
    auto it = assignment.find(r.id);
    if (it != assignment.end() && it->second != fold) out.push_back(r.id);
  }
  return out;
}

std::vector<std::vector<std::string>> conflict_groups(const RequirementSet& set) {
  const auto& reqs = set.requirements();
  std::vector<std::size_t> parent(reqs.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    for (const auto& p : reqs[i].partners) {
      auto j = set.index_of(p);
      if (!j) continue;
      auto a = find(i), b = find(*j);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::map<std::size_t, std::size_t> group_of_root;
  std::vector<std::vector<std::string>> groups;
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    auto root = find(i);
    auto [it, inserted] = group_of_root.emplace(root, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(reqs[i].id);
  }
  return groups;
}

FoldAssignment make_folds(const RequirementSet& set, std::size_t n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw config_error("n_folds must be at least 2, got " + std::to_string(n_folds));
  auto groups = conflict_groups(set);

  std::mt19937_64 rng(seed);
  for (std::size_t i = groups.size(); i > 1; --i) {
    std::swap(groups[i - 1], groups[rng() % i]);
  }
  std::stable_sort(groups.begin(), groups.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });

  FoldAssignment folds;
  folds.n_folds = n_folds;
  std::vector<std::size_t> sizes(n_folds, 0);
  for (const auto& g : groups) {
    auto target = static_cast<std::size_t>(std::min_element(sizes.begin(), sizes.end()) - sizes.begin());
    sizes[target] += g.size();
    for (const auto& id : g) folds.assignment[id] = target;
  }
  return folds;
}

// ---------------------------------------------------------------------------
// Synthetic conflicts

namespace {

bool is_word_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || u >= 0x80;
}

std::optional<std::size_t> find_phrase(std::string_view text, std::string_view phrase) {
  if (phrase.empty()) return std::nullopt;
  auto lower = to_lower(text);
  auto needle = to_lower(phrase);
  std::size_t pos = 0;
  while ((pos = lower.find(needle, pos)) != std::string::npos) {
    bool left_ok = pos == 0 || !is_word_byte(lower[pos - 1]) || !is_word_byte(needle.front());
    auto end = pos + needle.size();
    bool right_ok = end >= lower.size() || !is_word_byte(lower[end]) || !is_word_byte(needle.back());
    if (left_ok && right_ok) return pos;
    ++pos;
  }
  return std::nullopt;
}

// First maximal digit run not glued to letters.
std::optional<std::pair<std::size_t, std::size_t>> find_integer(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] >= '0' && text[i] <= '9') {
      auto start = i;
      while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
      bool left_ok = start == 0 || !is_word_byte(text[start - 1]);
      bool right_ok = i >= text.size() || !is_word_byte(text[i]);
      if (left_ok && right_ok && i - start <= 9) return std::make_pair(start, i - start);
    } else {
      ++i;
    }
  }
  return std::nullopt;
}

PerturbationKind parse_kind(std::string_view s, std::size_t line) {
  if (s == "unit") return PerturbationKind::Unit;
  if (s == "quantifier") return PerturbationKind::Quantifier;
  if (s == "phrase") return PerturbationKind::Phrase;
  throw validation_error("perturbation table line " + std::to_string(line) + ": unknown kind '" +
                         std::string(s) + "'");
}

std::string next_numeric_id(const std::set<std::string>& taken, std::uint64_t& counter) {
  while (true) {
    auto candidate = std::to_string(++counter);
    if (!taken.count(candidate)) return candidate;
  }
}

}  // namespace

PerturbationTable PerturbationTable::parse(std::string_view tsv) {
  PerturbationTable table;
  std::size_t line_no = 0;
  for (auto& raw : split(tsv, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3) {
      throw validation_error("perturbation table line " + std::to_string(line_no) +
                             ": expected kind<TAB>from<TAB>to");
    }
    table.rules_.push_back({parse_kind(trim(cols[0]), line_no), std::string(trim(cols[1])),
                            std::string(trim(cols[2]))});
  }
  return table;
}

const PerturbationTable& PerturbationTable::builtin() {
  static const PerturbationTable table = parse(embedded::kPerturbations);
  return table;
}

std::vector<PerturbationRule> PerturbationTable::applicable(std::string_view text) const {
  std::vector<PerturbationRule> out;
  for (const auto& rule : rules_) {
    if (find_phrase(text, rule.from)) out.push_back(rule);
    if (find_phrase(text, rule.to)) out.push_back({rule.kind, rule.to, rule.from});
  }
  if (find_integer(text)) out.push_back({PerturbationKind::Numeric, "", ""});
  return out;
}

std::optional<std::string> apply_perturbation(std::string_view text, const PerturbationRule& rule) {
  std::string out(text);
  if (rule.kind == PerturbationKind::Numeric) {
    auto hit = find_integer(text);
    if (!hit) return std::nullopt;
    auto value = std::stoull(out.substr(hit->first, hit->second));
    out.replace(hit->first, hit->second, std::to_string(value == 0 ? 1 : value * 2));
  } else {
    auto pos = find_phrase(text, rule.from);
    if (!pos) return std::nullopt;
    out.replace(*pos, rule.from.size(), rule.to);
  }
  if (out == text) return std::nullopt;
  return out;
}

RequirementSet generate_synthetic(const RequirementSet& set, const SynthOptions& options,
                                  const PerturbationTable& table) {
  if (set.empty()) throw validation_error("cannot generate synthetic conflicts from an empty set");
  if (options.n_conflicts == 0 && options.n_duplicates == 0) return set;

  std::vector<std::size_t> perturbable, others;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& r = set.requirements()[i];
    if (r.gold_conflict) continue;
    (table.applicable(r.text).empty() ? others : perturbable).push_back(i);
  }
  if (options.n_conflicts > perturbable.size()) {
    throw validation_error("requested " + std::to_string(options.n_conflicts) +
                           " synthetic conflicts but only " + std::to_string(perturbable.size()) +
                           " requirements can be perturbed");
  }

  std::mt19937_64 rng(options.seed);
  auto shuffle = [&](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
  };
  shuffle(perturbable);

  std::set<std::string> taken;
  std::uint64_t counter = 0;
  bool numeric_ids = true;
  for (const auto& r : set.requirements()) {
    taken.insert(r.id);
    if (is_all_digits(r.id) && r.id.size() < 18) counter = std::max<std::uint64_t>(counter, std::stoull(r.id));
    else numeric_ids = false;
  }
  std::uint64_t syn_counter = 0;
  auto fresh_id = [&] {
    if (numeric_ids) return next_numeric_id(taken, counter);
    while (true) {
      auto candidate = "syn-" + std::to_string(++syn_counter);
      if (!taken.count(candidate)) return candidate;
    }
  };

  auto reqs = set.requirements();
  auto link = [&](std::size_t source, std::string text) {
    Requirement copy;
    copy.id = fresh_id();
    taken.insert(copy.id);
    copy.text = std::move(text);
    copy.gold_conflict = true;
    copy.partners = {reqs[source].id};
    reqs[source].gold_conflict = true;
    reqs[source].partners.push_back(copy.id);
    reqs.push_back(std::move(copy));
  };

  for (std::size_t k = 0; k < options.n_conflicts; ++k) {
    auto source = perturbable[k];
    auto rules = table.applicable(reqs[source].text);
    auto rule = rules[rng() % rules.size()];
    auto text = apply_perturbation(reqs[source].text, rule);
    link(source, text.value_or(reqs[source].text));
  }

  std::vector<std::size_t> pool(perturbable.begin() + static_cast<std::ptrdiff_t>(options.n_conflicts),
                                perturbable.end());
  pool.insert(pool.end(), others.begin(), others.end());
  std::sort(pool.begin(), pool.end());
  if (options.n_duplicates > pool.size()) {
    throw validation_error("requested " + std::to_string(options.n_duplicates) + " duplicates but only " +
                           std::to_string(pool.size()) + " unused requirements remain");
  }
  shuffle(pool);
  for (std::size_t k = 0; k < options.n_duplicates; ++k) link(pool[k], reqs[pool[k]].text);

  return RequirementSet::make(set.name(), std::move(reqs));
}

}  // namespace reqconflict
