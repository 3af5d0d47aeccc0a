#include <doctest.h>

#include "reqconflict/error.hpp"
#include "reqconflict/text.hpp"

using namespace reqconflict;

namespace {

std::vector<std::string> surfaces(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& t : tokenize(text)) out.push_back(t.surface);
  return out;
}

}  // namespace

TEST_SUITE("text") {

TEST_CASE("tokenize lowercases and drops punctuation") {
  CHECK(surfaces("The UAV shall fully charge in less than 3 hours.") ==
        std::vector<std::string>{"the", "uav", "shall", "fully", "charge", "in", "less", "than", "3", "hours"});
}

TEST_CASE("tokenize keeps original casing and positions") {
  auto tokens = tokenize("The UAV shall");
  REQUIRE(tokens.size() == 3);
  CHECK(tokens[1].original == "UAV");
  CHECK(tokens[1].surface == "uav");
  CHECK(tokens[2].position == 2);
}

TEST_CASE("empty input yields no tokens") {
  CHECK(tokenize("").empty());
  CHECK(tokenize("  ... !").empty());
}

TEST_CASE("hyphen joins only between word characters") {
  CHECK(surfaces("pilot-directed flight") == std::vector<std::string>{"pilot-directed", "flight"});
  CHECK(surfaces("-leading and trailing- dash") == std::vector<std::string>{"leading", "and", "trailing", "dash"});
  CHECK(surfaces("a--b") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("non-ascii bytes stay inside tokens") {
  CHECK(surfaces("Gr\xC3\xBC\xC3\x9F" "e ok") == std::vector<std::string>{"gr\xC3\xBC\xC3\x9F" "e", "ok"});
}

TEST_CASE("number formatting round-trips") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(parse_double(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_fixed(0.125, 2) == "0.12");
  CHECK(format_fixed(-0.0001, 2) == "0.00");
  CHECK_THROWS_AS(parse_double("abc"), Error);
  CHECK_THROWS_AS(parse_double("1.5x"), Error);
}

TEST_CASE("split and trim") {
  CHECK(split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(trim("  x y \t") == "x y");
  CHECK(is_all_digits("0123"));
  CHECK_FALSE(is_all_digits(""));
  CHECK(has_digit("abc3"));
}

}
