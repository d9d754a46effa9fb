#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared by the parser, the suggestion engine and the
// wizard. All of them are byte-oriented and treat only ASCII as whitespace.
namespace promptassist::text {

[[nodiscard]] bool is_space(char c) noexcept;

[[nodiscard]] std::string_view trim(std::string_view s) noexcept;
[[nodiscard]] std::string_view trim_right(std::string_view s) noexcept;
[[nodiscard]] std::string_view trim_left(std::string_view s) noexcept;

/// Trimmed, ASCII-lowercased and with inner whitespace runs collapsed to one
/// space. Two suggestions are "the same" iff their keys are equal.
[[nodiscard]] std::string normalize_key(std::string_view s);

/// Splits on '\n'; a trailing '\r' is removed from every line.
[[nodiscard]] std::vector<std::string_view> split_lines(std::string_view s);

/// Number of Unicode code points in a UTF-8 string (counts non-continuation
/// bytes, so malformed input never throws).
[[nodiscard]] std::size_t utf8_length(std::string_view s) noexcept;

/// Collapses every whitespace run (including newlines) to a single space.
[[nodiscard]] std::string collapse_whitespace(std::string_view s);

[[nodiscard]] bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept;

}  // namespace promptassist::text
