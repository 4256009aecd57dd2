// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace deepforge::text {

std::string_view trim_view(std::string_view s) noexcept;
std::string trim(std::string_view s);

/// Collapses every run of ASCII whitespace into one space and trims.
std::string collapse_whitespace(std::string_view s);

/// ASCII case folding; non-ASCII bytes pass through unchanged.
std::string casefold(std::string_view s);

/// Name normalization used for deduplication: case-fold, trim, collapse
/// internal whitespace.
std::string normalize_name(std::string_view s);

bool is_ascii_space(char c) noexcept;
bool is_purely_numeric(std::string_view s) noexcept;
bool contains(std::string_view haystack, std::string_view needle) noexcept;

std::vector<std::string> split_lines(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Replaces every `{key}` occurrence with its value. Unknown placeholders stay.
std::string replace_all(std::string s, std::string_view from, std::string_view to);

/// Decodes one UTF-8 code point starting at `pos`; advances `pos`. Invalid
/// sequences decode as U+FFFD and consume one byte.
char32_t next_code_point(std::string_view s, std::size_t& pos) noexcept;

/// Number of code points (invalid bytes count as one each).
std::size_t code_point_count(std::string_view s) noexcept;

bool is_cjk(char32_t cp) noexcept;

/// Fraction of letter-like code points that are CJK ideographs/kana/hangul.
double cjk_ratio(std::string_view s) noexcept;

/// First code point count characters, for log messages.
std::string preview(std::string_view s, std::size_t max_chars = 80);

}  // namespace deepforge::text
