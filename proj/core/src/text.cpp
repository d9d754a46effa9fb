#include "promptassist/text.hpp"

#include "promptassist/error.hpp"

namespace promptassist {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::InvalidTemplate: return "InvalidTemplate";
    case ErrorCode::NoSuggestions: return "NoSuggestions";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::Cancelled: return "Cancelled";
    case ErrorCode::MissingFixture: return "MissingFixture";
    case ErrorCode::RecordingDisabled: return "RecordingDisabled";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
    case ErrorCode::InvalidQuery: return "InvalidQuery";
    case ErrorCode::WrongStep: return "WrongStep";
    case ErrorCode::SkipNotAllowed: return "SkipNotAllowed";
    case ErrorCode::EmptyPayload: return "EmptyPayload";
    case ErrorCode::NoScene: return "NoScene";
    case ErrorCode::WordNotFound: return "WordNotFound";
    case ErrorCode::EmptyPrompt: return "EmptyPrompt";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::CorruptRecord: return "CorruptRecord";
    case ErrorCode::StorageFull: return "StorageFull";
    case ErrorCode::SerializationFailure: return "SerializationFailure";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace promptassist

namespace promptassist::text {

bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim_left(std::string_view s) noexcept {
    std::size_t i = 0;
    while (i < s.size() && is_space(s[i])) ++i;
    return s.substr(i);
}

std::string_view trim_right(std::string_view s) noexcept {
    std::size_t n = s.size();
    while (n > 0 && is_space(s[n - 1])) --n;
    return s.substr(0, n);
}

std::string_view trim(std::string_view s) noexcept {
    return trim_right(trim_left(s));
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::string normalize_key(std::string_view s) {
    std::string out = collapse_whitespace(trim(s));
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::vector<std::string_view> split_lines(std::string_view s) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (true) {
        auto nl = s.find('\n', start);
        auto line = s.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return lines;
}

std::size_t utf8_length(std::string_view s) noexcept {
    std::size_t n = 0;
    for (unsigned char c : s) {
        if ((c & 0xC0) != 0x80) ++n;
    }
    return n;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        char a = s[i];
        char b = prefix[i];
        if (a >= 'A' && a <= 'Z') a = static_cast<char>(a - 'A' + 'a');
        if (b >= 'A' && b <= 'Z') b = static_cast<char>(b - 'A' + 'a');
        if (a != b) return false;
    }
    return true;
}

}  // namespace promptassist::text
