#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace reqconflict {

struct Token {
  std::string surface;   // lowercased
  std::string original;  // as written, for orthographic features
  std::size_t position = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

/// Splits on anything that is not alphanumeric, keeping hyphens that sit
/// between two token characters ("pilot-directed"). Bytes >= 0x80 are treated
/// as token characters so UTF-8 sequences are never split. No stopwords are
/// removed.
std::vector<Token> tokenize(std::string_view text);

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

bool is_all_digits(std::string_view s);
bool has_digit(std::string_view s);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
// printf("%.<decimals>f") without locale surprises.
std::string format_fixed(double v, int decimals);
double parse_double(std::string_view s);

}  // namespace reqconflict
