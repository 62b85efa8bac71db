#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dialogcap {

// Strips leading/trailing ASCII whitespace.
std::string trim_ws(std::string_view s);

// ASCII lowercase; also folds the UTF-8 typographic quotes (U+2018/2019 and
// U+201C/201D) to their ASCII counterparts so phrases like "don’t know" match.
std::string casefold(std::string_view s);

// Collapses every run of whitespace to a single space and trims the ends.
std::string collapse_ws(std::string_view s);

// Removes trailing ASCII punctuation characters.
std::string strip_trailing_punct(std::string_view s);

// Splits on whitespace runs; no empty tokens.
std::vector<std::string> split_ws(std::string_view s);

}  // namespace dialogcap
