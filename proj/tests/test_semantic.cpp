#include <doctest.h>

#include "overlap_table.hpp"
#include "reqconflict/error.hpp"
#include "reqconflict/semantic.hpp"

using namespace reqconflict;

namespace {

// Tags every token as a Noun; deterministic and independent of any lexicon.
class AllNouns final : public EntityTagger {
 public:
  std::string name() const override { return "all-nouns"; }
  std::vector<EntitySpan> tag(std::string_view, const std::vector<Token>& tokens) const override {
    std::vector<EntitySpan> out;
    for (std::size_t i = 0; i < tokens.size(); ++i) out.push_back({"Noun", i, i + 1, tokens[i].original});
    return out;
  }
};

class NothingTagger final : public EntityTagger {
 public:
  std::string name() const override { return "nothing"; }
  std::vector<EntitySpan> tag(std::string_view, const std::vector<Token>&) const override { return {}; }
};

class FailingTagger final : public EntityTagger {
 public:
  std::string name() const override { return "failing"; }
  std::vector<EntitySpan> tag(std::string_view, const std::vector<Token>&) const override {
    throw std::runtime_error("backend down");
  }
};

}  // namespace

TEST_SUITE("semantic") {

TEST_CASE("candidate profile has seven unique entity tokens") {
  auto c = testing::profile_of(testing::overlap_candidate());
  CHECK(unique_entities(c) == 7);
  CHECK(c.entities.count({"kilometers", "Metric"}));
}

TEST_CASE("overlap counts from the worked table") {
  auto c = testing::profile_of(testing::overlap_candidate());
  std::vector<std::size_t> expected{7, 5, 2, 2, 2};
  auto neighbors = testing::overlap_neighbors();
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    CHECK_MESSAGE(overlap(c, testing::profile_of(neighbors[i])) == expected[i], neighbors[i].id);
  }
}

TEST_CASE("exact matching alone undercounts the unit pair") {
  auto c = testing::profile_of(testing::overlap_candidate());
  auto r1 = testing::profile_of(testing::overlap_neighbors()[0]);
  auto shared = overlapping_tokens(c, r1);
  CHECK(std::find(shared.begin(), shared.end(), "kilometers") != shared.end());
  // Same tokens typed as something other than Metric do not pair up.
  EntityProfile a{"a", {{"kilometers", "Object"}}}, b{"b", {{"miles", "Object"}}};
  CHECK(overlap(a, b) == 0);
  EntityProfile m1{"a", {{"kilometers", "Metric"}}}, m2{"b", {{"miles", "Metric"}}};
  CHECK(overlap(m1, m2) == 1);
}

TEST_CASE("overlap ratio and display") {
  auto c = testing::profile_of(testing::overlap_candidate());
  std::vector<EntityProfile> neighbors;
  for (const auto& t : testing::overlap_neighbors()) neighbors.push_back(testing::profile_of(t));
  auto r = overlap_ratio(c, neighbors);
  CHECK(r.best_match == "r1");
  CHECK(r.numerator == 7);
  CHECK(r.denominator == 7);
  CHECK(r.display() == "1.00");

  CHECK(truncate_ratio(5, 7) == "0.71");
  CHECK(truncate_ratio(2, 7) == "0.28");
  CHECK(truncate_ratio(7, 7) == "1.00");
  CHECK(truncate_ratio(0, 0) == "0.00");

  std::vector<EntityProfile> rest(neighbors.begin() + 1, neighbors.end());
  auto r2 = overlap_ratio(c, rest);
  CHECK(r2.best_match == "r2");
  CHECK(r2.display() == "0.71");
  CHECK(r2.ratio() == doctest::Approx(5.0 / 7.0));

  CHECK_THROWS_AS(overlap_ratio(c, {}), Error);
}

TEST_CASE("set semantics and empty profiles") {
  auto tokens = tokenize("uav uav uav");
  auto p = make_profile("x", tokens, {{"Actor", 0, 1, "uav"}, {"Actor", 1, 2, "uav"}, {"Actor", 2, 3, "uav"}});
  CHECK(unique_entities(p) == 1);
  EntityProfile empty{"e", {}};
  CHECK(unique_entities(empty) == 0);
  auto r = overlap_ratio(empty, {p});
  CHECK(r.ratio() == 0.0);
}

TEST_CASE("phase2 filter") {
  std::vector<Requirement> reqs{{"a", "The drone shall hover above the field.", true, {"b"}},
                                {"b", "The drone shall hover above the field.", true, {"a"}},
                                {"c", "The drone shall land beside the field.", false, {}},
                                {"d", "Batteries are charged overnight in the hangar.", false, {}}};
  auto set = RequirementSet::make("p2", reqs);
  auto m = pairwise_matrix(TfidfModel::fit(set).embed_all(set));
  CandidateConflictSet cands;
  cands.members = {"a", "c"};

  SUBCASE("duplicate kept, similar-but-different dropped") {
    auto out = phase2_filter(cands, set, m, AllNouns{}, {2, 1.0});
    CHECK(out.members == std::vector<std::string>{"a"});
    CHECK(out.provenance.at("a").best_match == "b");
    CHECK(out.provenance.at("c").ratio() < 1.0);
    CHECK(out.provenance.size() == 2);
  }
  SUBCASE("threshold zero keeps every candidate") {
    auto out = phase2_filter(cands, set, m, NothingTagger{}, {5, 0.0});
    CHECK(out.members == cands.members);
  }
  SUBCASE("no entities means dropped") {
    auto out = phase2_filter(cands, set, m, NothingTagger{}, {5, 1.0});
    CHECK(out.members.empty());
  }
  SUBCASE("output is a subset of the candidates") {
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      auto out = phase2_filter(cands, set, m, GeneralTagger{}, {3, t});
      for (const auto& id : out.members) CHECK(std::find(cands.members.begin(), cands.members.end(), id) != cands.members.end());
    }
  }
  SUBCASE("tagger failures name the requirement") {
    try {
      phase2_filter(cands, set, m, FailingTagger{}, {});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("failing") != std::string::npos);
      CHECK(std::string(e.what()).find("a") != std::string::npos);
    }
  }
  SUBCASE("m_count zero is a config error") {
    CHECK_THROWS_AS(phase2_filter(cands, set, m, AllNouns{}, {0, 1.0}), Error);
  }
}

}
