#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small ASCII-oriented helpers shared by the caption tagger and the rule-based
// backend. Non-ASCII bytes are treated as word characters so UTF-8 text
// survives tokenization intact.
namespace captune::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);

bool starts_with_ci(std::string_view s, std::string_view prefix);
bool contains_ci(std::string_view haystack, std::string_view needle);

// True when every ASCII letter in `s` is uppercase and there is at least one.
bool is_all_caps(std::string_view s);

// Splits on anything that is not a letter, digit, apostrophe, hyphen or a
// non-ASCII byte. Tokens keep their original case.
std::vector<std::string> words(std::string_view s);

// Matches a lowercase token against a keyword stem, accepting the common
// English inflections: -s, -es, -ed, -d, -ing, -er, -y, e-dropping before
// -ing ("whistle" -> "whistling") and consonant doubling ("slam" -> "slamming").
bool inflection_of(std::string_view token, std::string_view stem);

std::vector<std::string> split_lines(std::string_view s);

} // namespace captune::text
