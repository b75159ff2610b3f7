#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace xner::text {

/// Decode UTF-8 into code points. Invalid bytes decode to U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

/// Unicode simple case mapping (C.UTF-8 locale tables).
char32_t to_lower(char32_t c);
char32_t to_upper(char32_t c);
bool is_upper(char32_t c);
bool is_lower(char32_t c);

std::string lowercase(std::string_view s);
std::string uppercase(std::string_view s);

/// Observable capitalization patterns of a token.
enum class CasePattern { lower, initial, all_caps };

/// all_caps: at least two cased letters and no lowercase letter.
/// initial: first letter is uppercase (covers mixed case such as "McDonald").
/// lower: everything else.
CasePattern case_pattern(std::string_view token);

/// Rewrite `token` so that case_pattern(result) matches `pattern` where possible.
std::string apply_pattern(std::string_view token, CasePattern pattern);

/// Uppercase the first code point, leave the rest untouched.
std::string capitalize_first(std::string_view token);

/// Split on ASCII whitespace, dropping empty fields.
std::vector<std::string> split_ws(std::string_view line);

/// Strip trailing '\r' (files written on Windows).
std::string_view chomp(std::string_view line);

}  // namespace xner::text
