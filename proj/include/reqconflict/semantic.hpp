#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "reqconflict/corpus.hpp"
#include "reqconflict/ner.hpp"
#include "reqconflict/similarity.hpp"
#include "reqconflict/threshold.hpp"

namespace reqconflict {

struct EntityToken {
  std::string token;  // lowercased
  std::string type;

  auto operator<=>(const EntityToken&) const = default;
};

struct EntityProfile {
  std::string id;
  std::set<EntityToken> entities;
};

/// Token-level profile: every token inside every span, lowercased.
EntityProfile make_profile(std::string id, const std::vector<Token>& tokens, const std::vector<EntitySpan>& spans);

bool is_unit_word(std::string_view token);

std::size_t unique_entities(const EntityProfile& profile);

/// Number of the candidate's entity tokens found in `other`: equal tokens, or
/// two Metric-typed unit words (kilometers ~ miles).
std::size_t overlap(const EntityProfile& candidate, const EntityProfile& other);
std::vector<std::string> overlapping_tokens(const EntityProfile& candidate, const EntityProfile& other);

struct OverlapResult {
  std::string candidate;
  std::string best_match;
  std::vector<std::pair<std::string, std::size_t>> per_neighbor;  // neighbor order
  std::size_t numerator = 0;    // max overlap
  std::size_t denominator = 0;  // unique entities of the candidate
  std::vector<std::string> shared_tokens;

  /// numerator / denominator, 0 when the candidate has no entities.
  double ratio() const;
  /// Truncated (not rounded) to two decimals: 2/7 -> "0.28".
  std::string display() const;
};

/// Max overlap with any neighbour over the candidate's unique entity count.
OverlapResult overlap_ratio(const EntityProfile& candidate, const std::vector<EntityProfile>& neighbors);

/// Two-decimal truncation of num/den computed in integers.
std::string truncate_ratio(std::size_t numerator, std::size_t denominator);

struct Phase2Options {
  std::size_t m_count = 5;
  double t_o = 1.0;
};

struct FinalConflictSet {
  std::vector<std::string> members;
  std::map<std::string, OverlapResult> provenance;  // every evaluated candidate
  bool contains(const std::string& id) const;
};

/// Tags requirements lazily and keeps the profiles.
class ProfileCache {
 public:
  ProfileCache(const RequirementSet& set, const EntityTagger& tagger) : set_(&set), tagger_(&tagger) {}
  const EntityProfile& get(const std::string& id);

 private:
  const RequirementSet* set_;
  const EntityTagger* tagger_;
  std::map<std::string, EntityProfile> profiles_;
};

/// Keeps a candidate iff its overlap ratio against its m most similar
/// requirements reaches t_o.
FinalConflictSet phase2_filter(const std::vector<std::string>& candidates, const RequirementSet& set,
                               const SimilarityMatrix& matrix, ProfileCache& profiles,
                               const Phase2Options& options = {});
FinalConflictSet phase2_filter(const CandidateConflictSet& candidates, const RequirementSet& set,
                               const SimilarityMatrix& matrix, const EntityTagger& tagger,
                               const Phase2Options& options = {});

}  // namespace reqconflict
