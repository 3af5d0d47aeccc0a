#include "reqconflict/semantic.hpp"

#include <algorithm>
#include <array>

#include "reqconflict/error.hpp"

namespace reqconflict {

EntityProfile make_profile(std::string id, const std::vector<Token>& tokens, const std::vector<EntitySpan>& spans) {
  EntityProfile p;
  p.id = std::move(id);
  for (const auto& s : spans) {
    if (s.end > tokens.size() || s.start >= s.end) throw validation_error("entity span out of range for " + p.id);
    for (auto i = s.start; i < s.end; ++i) p.entities.insert({tokens[i].surface, s.type});
  }
  return p;
}

bool is_unit_word(std::string_view token) {
  static constexpr std::array<std::string_view, 56> kUnits{
      "mile",       "miles",    "kilometer", "kilometers", "kilometre", "kilometres", "km",      "meter",
      "meters",     "metre",    "metres",    "m",          "cm",        "mm",         "feet",    "foot",
      "ft",         "inch",     "inches",    "yard",       "yards",     "nm",         "second",  "seconds",
      "sec",        "s",        "ms",        "minute",     "minutes",   "min",        "hour",    "hours",
      "h",          "hr",       "day",       "days",       "week",      "weeks",      "kilogram", "kilograms",
      "kg",         "gram",     "grams",     "g",          "pound",     "pounds",     "lb",      "lbs",
      "knot",       "knots",    "mph",       "kph",        "percent",   "hz",         "volts",   "watts"};
  auto lower = to_lower(token);
  return std::find(kUnits.begin(), kUnits.end(), lower) != kUnits.end();
}

std::size_t unique_entities(const EntityProfile& profile) { return profile.entities.size(); }

namespace {

bool matches(const EntityToken& a, const EntityToken& b) {
  if (a.token == b.token) return true;
  return a.type == "Metric" && b.type == "Metric" && is_unit_word(a.token) && is_unit_word(b.token);
}

}  // namespace

std::vector<std::string> overlapping_tokens(const EntityProfile& candidate, const EntityProfile& other) {
  std::vector<std::string> out;
  for (const auto& e : candidate.entities) {
    for (const auto& o : other.entities) {
      if (matches(e, o)) {
        out.push_back(e.token);
        break;
      }
    }
  }
  return out;
}

std::size_t overlap(const EntityProfile& candidate, const EntityProfile& other) {
  return overlapping_tokens(candidate, other).size();
}

double OverlapResult::ratio() const {
  if (denominator == 0) return 0.0;
  return std::min(1.0, static_cast<double>(numerator) / static_cast<double>(denominator));
}

std::string truncate_ratio(std::size_t numerator, std::size_t denominator) {
  if (denominator == 0) return "0.00";
  numerator = std::min(numerator, denominator);
  auto hundredths = numerator * 100 / denominator;
  auto frac = std::to_string(hundredths % 100);
  if (frac.size() < 2) frac = "0" + frac;
  return std::to_string(hundredths / 100) + "." + frac;
}

std::string OverlapResult::display() const { return truncate_ratio(numerator, denominator); }

OverlapResult overlap_ratio(const EntityProfile& candidate, const std::vector<EntityProfile>& neighbors) {
  if (neighbors.empty()) throw validation_error("overlap_ratio needs at least one neighbour for " + candidate.id);
  OverlapResult r;
  r.candidate = candidate.id;
  r.denominator = unique_entities(candidate);
  bool first = true;
  for (const auto& n : neighbors) {
    auto shared = overlapping_tokens(candidate, n);
    r.per_neighbor.emplace_back(n.id, shared.size());
    if (first || shared.size() > r.numerator) {
      r.numerator = shared.size();
      r.best_match = n.id;
      r.shared_tokens = std::move(shared);
      first = false;
    }
  }
  return r;
}

bool FinalConflictSet::contains(const std::string& id) const {
  return std::find(members.begin(), members.end(), id) != members.end();
}

const EntityProfile& ProfileCache::get(const std::string& id) {
  auto it = profiles_.find(id);
  if (it != profiles_.end()) return it->second;
  const auto& req = set_->at(id);
  auto tokens = tokenize(req.text);
  std::vector<EntitySpan> spans;
  try {
    spans = tagger_->tag(id, tokens);
  } catch (const std::exception& e) {
    throw runtime_error("tagger '" + tagger_->name() + "' failed on requirement " + id + ": " + e.what());
  }
  return profiles_.emplace(id, make_profile(id, tokens, spans)).first->second;
}

FinalConflictSet phase2_filter(const std::vector<std::string>& candidates, const RequirementSet& set,
                               const SimilarityMatrix& matrix, ProfileCache& profiles, const Phase2Options& options) {
  if (options.m_count == 0) throw config_error("m_count must be at least 1");
  FinalConflictSet out;
  for (const auto& c : candidates) {
    if (!set.index_of(c)) throw validation_error("candidate " + c + " is not in the requirement set");
    std::vector<EntityProfile> neighbors;
    for (const auto& n : matrix.top_m(c, options.m_count)) neighbors.push_back(profiles.get(n.id));
    auto result = overlap_ratio(profiles.get(c), neighbors);
    if (result.ratio() >= options.t_o) out.members.push_back(c);
    out.provenance.emplace(c, std::move(result));
  }
  return out;
}

FinalConflictSet phase2_filter(const CandidateConflictSet& candidates, const RequirementSet& set,
                               const SimilarityMatrix& matrix, const EntityTagger& tagger,
                               const Phase2Options& options) {
  ProfileCache cache(set, tagger);
  return phase2_filter(candidates.members, set, matrix, cache, options);
}

}  // namespace reqconflict
