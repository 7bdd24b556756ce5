#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace deideval::text {

// Decodes the UTF-8 sequence starting at data[i]. Writes the codepoint and
// returns the number of bytes consumed. Invalid bytes decode as U+FFFD with
// length 1 so that counting never gets stuck.
std::size_t decode_utf8(std::string_view data, std::size_t i, char32_t* out);

// True for codepoints with the Unicode White_Space property.
bool is_unicode_space(char32_t cp);

// Number of maximal runs of non-whitespace codepoints.
std::size_t count_tokens(std::string_view s);

// ASCII-aware lowercasing plus simple one-codepoint Unicode case folding
// for Latin-1 and Latin Extended-A letters. Other codepoints pass through.
std::string lower(std::string_view s);

// Collapse every run of Unicode whitespace to a single ASCII space and trim
// the ends.
std::string collapse_whitespace(std::string_view s);

// Trim Unicode whitespace from both ends.
std::string trim(std::string_view s);

// Strip leading and trailing ASCII punctuation codepoints.
std::string strip_edge_punct(std::string_view s);

// Split on Unicode whitespace; no empty fields.
std::vector<std::string> split_ws(std::string_view s);

bool starts_with_ci(std::string_view s, std::string_view prefix);
bool equals_ci(std::string_view a, std::string_view b);

}  // namespace deideval::text
