#include "promptassist/completion_parser.hpp"

#include <array>
#include <unordered_set>

#include "promptassist/error.hpp"
#include "promptassist/text.hpp"

namespace promptassist {

namespace {

std::string_view first_non_blank_line(std::string_view raw) {
    for (auto line : text::split_lines(raw)) {
        if (!text::trim(line).empty()) return line;
    }
    return {};
}

std::string_view strip_trailing_commas(std::string_view s) {
    while (true) {
        auto trimmed = text::trim_right(s);
        if (trimmed.empty() || trimmed.back() != ',') return trimmed;
        s = trimmed.substr(0, trimmed.size() - 1);
    }
}

}  // namespace

ParsedSuggestions parse_comma_list(std::string_view raw, std::size_t max_items) {
    if (max_items == 0) throw Error(ErrorCode::InvalidRequest, "max_items must be at least 1");

    ParsedSuggestions out;
    out.raw = std::string(raw);

    std::unordered_set<std::string> seen;
    auto line = first_non_blank_line(raw);
    std::size_t start = 0;
    while (start <= line.size()) {
        auto comma = line.find(',', start);
        auto piece = text::trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        start = comma == std::string_view::npos ? line.size() + 1 : comma + 1;
        if (piece.empty()) continue;
        if (!seen.insert(text::normalize_key(piece)).second) continue;
        if (out.items.size() == max_items) {
            out.truncated = true;
            break;
        }
        out.items.emplace_back(piece);
    }
    if (out.items.empty()) throw Error(ErrorCode::NoSuggestions, "completion contained no suggestions");
    return out;
}

std::string parse_single_value(std::string_view raw) {
    auto line = text::trim(first_non_blank_line(raw));
    static constexpr std::array<std::string_view, 2> kLabels{"suggestion:", "name:"};
    for (auto label : kLabels) {
        for (std::size_t i = 0; i + label.size() <= line.size(); ++i) {
            if (text::starts_with_ci(line.substr(i), label)) {
                line = text::trim(line.substr(i + label.size()));
                break;
            }
        }
    }
    if (line.empty()) throw Error(ErrorCode::NoSuggestions, "completion contained no suggestion");
    return std::string(line);
}

ParsedScene parse_scene(std::string_view raw) {
    ParsedScene out;
    out.raw = std::string(raw);

    std::string joined;
    bool any = false;
    for (auto line : text::split_lines(text::trim_left(raw))) {
        if (text::trim(line).empty()) break;
        if (any && text::starts_with_ci(text::trim_left(line), "words:")) break;
        if (any) joined.push_back(' ');
        joined.append(line);
        any = true;
    }
    out.text = text::collapse_whitespace(strip_trailing_commas(text::trim(joined)));
    if (out.text.empty()) throw Error(ErrorCode::NoSuggestions, "completion contained no scene");
    return out;
}

}  // namespace promptassist
