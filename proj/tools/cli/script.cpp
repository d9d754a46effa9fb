#include "script.hpp"

#include <charconv>
#include <optional>

#include "promptassist/text.hpp"

namespace promptassist::cli {

namespace {

// Splits off the first whitespace-delimited word.
std::pair<std::string_view, std::string_view> split_word(std::string_view s) {
    s = text::trim_left(s);
    std::size_t end = 0;
    while (end < s.size() && !text::is_space(s[end])) ++end;
    return {s.substr(0, end), text::trim(s.substr(end))};
}

std::optional<std::size_t> parse_index(std::string_view s) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) return std::nullopt;
    return v;
}

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

}  // namespace

ScriptCommand parse_script_line(std::string_view line, std::size_t line_number) {
    auto [verb_text, rest] = split_word(line);
    std::string verb(verb_text);
    ScriptCommand cmd;
    cmd.line = line_number;

    bool add = false;
    if (verb.size() > 4 && verb.ends_with("-add")) {
        add = true;
        verb.resize(verb.size() - 4);
        if (verb != "type" && verb != "accept" && verb != "pick" && verb != "edit") {
            throw ScriptError(line_number, "unknown command \"" + std::string(verb_text) + "\"");
        }
    }
    cmd.advance = !add;

    auto need_text = [&](std::string_view what) {
        if (rest.empty()) throw ScriptError(line_number, std::string(verb_text) + " needs " + std::string(what));
    };
    auto need_none = [&] {
        if (!rest.empty()) throw ScriptError(line_number, std::string(verb_text) + " takes no arguments");
    };
    auto take_index = [&]() {
        auto [n, tail] = split_word(rest);
        auto index = parse_index(n);
        if (!index) throw ScriptError(line_number, std::string(verb_text) + " needs a suggestion number");
        cmd.index = *index;
        return tail;
    };

    if (verb == "type") {
        need_text("text");
        cmd.verb = Verb::Type;
        cmd.text = std::string(rest);
    } else if (verb == "accept") {
        need_text("text");
        cmd.verb = Verb::Accept;
        cmd.text = std::string(rest);
    } else if (verb == "pick") {
        cmd.verb = Verb::Pick;
        if (!take_index().empty()) throw ScriptError(line_number, "pick takes only a suggestion number");
    } else if (verb == "edit") {
        cmd.verb = Verb::Edit;
        auto tail = take_index();
        if (tail.empty()) throw ScriptError(line_number, "edit needs the edited text");
        cmd.text = std::string(tail);
    } else if (verb == "skip") {
        need_none();
        cmd.verb = Verb::Skip;
    } else if (verb == "back") {
        need_none();
        cmd.verb = Verb::Back;
        cmd.advance = false;
    } else if (verb == "restart") {
        need_none();
        cmd.verb = Verb::Restart;
        cmd.advance = false;
    } else if (verb == "replace") {
        auto [word, replacement] = split_word(rest);
        if (word.empty() || replacement.empty()) throw ScriptError(line_number, "replace needs a word and its replacement");
        cmd.verb = Verb::Replace;
        cmd.target = std::string(word);
        cmd.text = std::string(replacement);
    } else if (verb == "suggest") {
        need_none();
        cmd.verb = Verb::Suggest;
    } else if (verb == "more") {
        need_none();
        cmd.verb = Verb::More;
    } else {
        throw ScriptError(line_number, "unknown command \"" + std::string(verb_text) + "\"");
    }
    return cmd;
}

std::vector<ScriptCommand> parse_script(std::istream& in) {
    std::vector<ScriptCommand> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto trimmed = text::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        out.push_back(parse_script_line(trimmed, number));
    }
    return out;
}

std::size_t typed_chars_for_edit(std::string_view original, std::string_view edited) {
    std::size_t prefix = 0;
    while (prefix < original.size() && prefix < edited.size() && original[prefix] == edited[prefix]) ++prefix;
    while (prefix > 0 && prefix < edited.size() && is_continuation(static_cast<unsigned char>(edited[prefix]))) {
        --prefix;
    }
    std::size_t suffix = 0;
    while (suffix < original.size() - prefix && suffix < edited.size() - prefix &&
           original[original.size() - 1 - suffix] == edited[edited.size() - 1 - suffix]) {
        ++suffix;
    }
    while (suffix > 0 && is_continuation(static_cast<unsigned char>(edited[edited.size() - suffix]))) --suffix;
    return text::utf8_length(edited.substr(prefix, edited.size() - prefix - suffix));
}

}  // namespace promptassist::cli
