#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reqconflict {

struct Requirement {
  std::string id;
  std::string text;
  bool gold_conflict = false;
  std::vector<std::string> partners;  // empty iff !gold_conflict

  friend bool operator==(const Requirement&, const Requirement&) = default;
};

struct Diagnostic {
  std::size_t row = 0;  // line number in the source file, 0 when not row-specific
  std::string message;

  std::string to_string() const;
};

/// Ordered, validated requirement set. Construction through `make` or
/// `parse_requirements` guarantees unique ids, non-empty text, symmetric and
/// resolvable partner links.
class RequirementSet {
 public:
  RequirementSet() = default;

  static RequirementSet make(std::string name, std::vector<Requirement> requirements);

  const std::string& name() const { return name_; }
  const std::vector<Requirement>& requirements() const { return requirements_; }
  std::size_t size() const { return requirements_.size(); }
  bool empty() const { return requirements_.empty(); }

  const Requirement& at(std::string_view id) const;
  std::optional<std::size_t> index_of(std::string_view id) const;
  std::vector<std::string> ids() const;
  std::map<std::string, bool> gold_labels() const;

 private:
  std::string name_;
  std::vector<Requirement> requirements_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Structural checks shared by the parser, `make` and the validate command.
std::vector<Diagnostic> check_requirements(const std::vector<Requirement>& requirements,
                                           const std::vector<std::size_t>& rows = {});

/// CSV with header `id,text,conflict,conflict_label`. Returns every problem
/// found rather than stopping at the first.
std::vector<Diagnostic> validate_requirements(std::string_view csv);

/// Throws a validation Error carrying all diagnostics on failure.
RequirementSet parse_requirements(std::string_view csv, std::string name = "dataset");
std::string serialize_requirements(const RequirementSet& set);

RequirementSet load_requirements(const std::string& path);

// ---------------------------------------------------------------------------

struct FoldAssignment {
  std::size_t n_folds = 0;
  std::map<std::string, std::size_t> assignment;

  std::vector<std::string> ids_in(std::size_t fold, const RequirementSet& order) const;
  std::vector<std::string> ids_outside(std::size_t fold, const RequirementSet& order) const;
};

/// Connected components of the partner graph, each listed in dataset order,
/// components ordered by their first member.
std::vector<std::vector<std::string>> conflict_groups(const RequirementSet& set);

/// Pair-preserving k-fold split: components are shuffled with `seed`, then
/// placed largest-first onto the currently smallest fold.
FoldAssignment make_folds(const RequirementSet& set, std::size_t n_folds, std::uint64_t seed);

// ---------------------------------------------------------------------------

enum class PerturbationKind { Unit, Quantifier, Phrase, Numeric };

struct PerturbationRule {
  PerturbationKind kind = PerturbationKind::Phrase;
  std::string from;
  std::string to;
};

/// Rules are symmetric: each row `kind<TAB>a<TAB>b` rewrites a -> b and b -> a.
class PerturbationTable {
 public:
  static PerturbationTable parse(std::string_view tsv);
  static const PerturbationTable& builtin();

  const std::vector<PerturbationRule>& rules() const { return rules_; }

  // Directed rewrites applicable to `text`; a Numeric rule is included when
  // the text contains an integer.
  std::vector<PerturbationRule> applicable(std::string_view text) const;

 private:
  std::vector<PerturbationRule> rules_;
};

/// Applies one directed rule to the first whole-word, case-insensitive match.
/// Numeric rules double the first integer. Returns nullopt if nothing changed.
std::optional<std::string> apply_perturbation(std::string_view text, const PerturbationRule& rule);

struct SynthOptions {
  std::size_t n_conflicts = 0;   // perturbed copies
  std::size_t n_duplicates = 0;  // verbatim copies
  std::uint64_t seed = 0;
};

/// Appends planted conflicts, each linked to the original it was derived from.
/// Sources are drawn without replacement from requirements that have no gold
/// conflict yet.
RequirementSet generate_synthetic(const RequirementSet& set, const SynthOptions& options,
                                  const PerturbationTable& table = PerturbationTable::builtin());

}  // namespace reqconflict
