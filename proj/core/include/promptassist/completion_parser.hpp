#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace promptassist {

struct ParsedSuggestions {
    std::vector<std::string> items;
    bool truncated = false;
    std::string raw;
};

struct ParsedScene {
    std::string text;
    std::string raw;
};

/// First non-blank line of `raw`, split on commas. Items are trimmed, empty
/// pieces dropped, and later duplicates (case-insensitive) removed; the first
/// spelling wins. Throws Error{NoSuggestions} when nothing survives and
/// Error{InvalidRequest} when max_items is zero.
ParsedSuggestions parse_comma_list(std::string_view raw, std::size_t max_items);

/// One value from a single-value completion. An echoed "Suggestion:" or
/// "Name:" label is cut off together with everything before it.
std::string parse_single_value(std::string_view raw);

/// One scene paragraph. Cuts at "\nwords:" or the first blank line, joins the
/// remaining lines with single spaces and drops trailing commas.
ParsedScene parse_scene(std::string_view raw);

}  // namespace promptassist
