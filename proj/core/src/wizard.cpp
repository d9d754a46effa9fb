#include "promptassist/wizard.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "promptassist/error.hpp"
#include "promptassist/text.hpp"

namespace promptassist {

std::string_view to_string(Step step) noexcept {
    switch (step) {
    case Step::Environment: return "environment";
    case Step::Subjects: return "subjects";
    case Step::Actions: return "actions";
    case Step::Scene: return "scene";
    case Step::Style: return "style";
    case Step::Done: return "done";
    }
    return "unknown";
}

std::optional<Step> parse_step(std::string_view s) noexcept {
    for (auto step : {Step::Environment, Step::Subjects, Step::Actions, Step::Scene, Step::Style, Step::Done}) {
        if (to_string(step) == s) return step;
    }
    return std::nullopt;
}

std::string_view to_string(EventKind kind) noexcept {
    switch (kind) {
    case EventKind::Typed: return "typed";
    case EventKind::AcceptedSuggestion: return "accepted_suggestion";
    case EventKind::EditedSuggestion: return "edited_suggestion";
    case EventKind::Skipped: return "skipped";
    case EventKind::WentBack: return "went_back";
    case EventKind::Restarted: return "restarted";
    case EventKind::ReplacedWord: return "replaced_word";
    case EventKind::Assembled: return "assembled";
    }
    return "unknown";
}

std::optional<EventKind> parse_event_kind(std::string_view s) noexcept {
    for (auto k : {EventKind::Typed, EventKind::AcceptedSuggestion, EventKind::EditedSuggestion,
                   EventKind::Skipped, EventKind::WentBack, EventKind::Restarted, EventKind::ReplacedWord,
                   EventKind::Assembled}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

std::string_view to_string(ActionKind kind) noexcept {
    switch (kind) {
    case ActionKind::TypeText: return "type";
    case ActionKind::AcceptSuggestion: return "accept";
    case ActionKind::EditSuggestion: return "edit";
    case ActionKind::Skip: return "skip";
    case ActionKind::Back: return "back";
    case ActionKind::Restart: return "restart";
    }
    return "unknown";
}

std::optional<ActionKind> parse_action_kind(std::string_view s) noexcept {
    for (auto k : {ActionKind::TypeText, ActionKind::AcceptSuggestion, ActionKind::EditSuggestion,
                   ActionKind::Skip, ActionKind::Back, ActionKind::Restart}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

bool same_state(const Session& a, const Session& b) {
    return a.step == b.step && a.environment == b.environment && a.subjects == b.subjects &&
           a.actions == b.actions && a.scene == b.scene && a.style == b.style;
}

namespace {

Step next_step(Step s) {
    switch (s) {
    case Step::Environment: return Step::Subjects;
    case Step::Subjects: return Step::Actions;
    case Step::Actions: return Step::Scene;
    case Step::Scene: return Step::Style;
    case Step::Style:
    case Step::Done: return Step::Done;
    }
    return Step::Done;
}

Step previous_step(Step s) {
    switch (s) {
    case Step::Environment:
    case Step::Subjects: return Step::Environment;
    case Step::Actions: return Step::Subjects;
    case Step::Scene: return Step::Actions;
    case Step::Style: return Step::Scene;
    case Step::Done: return Step::Style;
    }
    return Step::Environment;
}

bool is_word_byte(char c) {
    auto u = static_cast<unsigned char>(c);
    return (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || u == '_' || u >= 0x80;
}

std::size_t find_whole_word(std::string_view haystack, std::string_view word) {
    if (word.empty()) return std::string_view::npos;
    for (auto pos = haystack.find(word); pos != std::string_view::npos; pos = haystack.find(word, pos + 1)) {
        bool left_ok = pos == 0 || !is_word_byte(haystack[pos - 1]) || !is_word_byte(word.front());
        auto end = pos + word.size();
        bool right_ok = end == haystack.size() || !is_word_byte(haystack[end]) || !is_word_byte(word.back());
        if (left_ok && right_ok) return pos;
    }
    return std::string_view::npos;
}

std::string strip_trailing(std::string_view s, std::string_view chars) {
    while (true) {
        s = text::trim_right(s);
        if (s.empty() || chars.find(s.back()) == std::string_view::npos) return std::string(s);
        s.remove_suffix(1);
    }
}

void add_unique(std::vector<std::string>& list, const std::string& value) {
    auto key = text::normalize_key(value);
    bool present = std::any_of(list.begin(), list.end(),
                               [&](const std::string& v) { return text::normalize_key(v) == key; });
    if (!present) list.push_back(value);
}

void clear_step(Session& s, Step step) {
    switch (step) {
    case Step::Environment: s.environment.reset(); break;
    case Step::Subjects: s.subjects.clear(); break;
    case Step::Actions: s.actions.clear(); break;
    case Step::Scene: s.scene.reset(); break;
    case Step::Style: s.style.reset(); break;
    case Step::Done: break;
    }
}

void reset_fields(Session& s) {
    s.step = Step::Environment;
    s.environment.reset();
    s.subjects.clear();
    s.actions.clear();
    s.scene.reset();
    s.style.reset();
}

// Validates `e` against the current state and applies its effect. Both live
// actions and replay go through here, so replay cannot diverge.
void apply_event(Session& s, const InteractionEvent& e) {
    auto bad = [&](ErrorCode code, const std::string& why) {
        throw Error(code, std::string(to_string(e.kind)) + " at " + std::string(to_string(s.step)) + ": " + why);
    };

    switch (e.kind) {
    case EventKind::Typed:
    case EventKind::AcceptedSuggestion:
    case EventKind::EditedSuggestion: {
        if (e.step != s.step || s.step == Step::Done) bad(ErrorCode::WrongStep, "no input is expected here");
        if (text::trim(e.payload).empty()) bad(ErrorCode::EmptyPayload, "text is blank");
        switch (s.step) {
        case Step::Environment: s.environment = e.payload; break;
        case Step::Subjects: add_unique(s.subjects, e.payload); break;
        case Step::Actions: add_unique(s.actions, e.payload); break;
        case Step::Scene: s.scene = e.payload; break;
        case Step::Style: s.style = e.payload; break;
        case Step::Done: break;
        }
        if (e.advance) s.step = next_step(s.step);
        break;
    }
    case EventKind::Skipped:
        if (e.step != s.step || s.step == Step::Done) bad(ErrorCode::WrongStep, "nothing to skip");
        if (s.step == Step::Scene) bad(ErrorCode::SkipNotAllowed, "a prompt needs a scene");
        clear_step(s, s.step);
        s.step = next_step(s.step);
        break;
    case EventKind::WentBack:
        if (e.step != s.step) bad(ErrorCode::WrongStep, "event step mismatch");
        s.step = previous_step(s.step);
        break;
    case EventKind::Restarted:
        if (e.step != s.step) bad(ErrorCode::WrongStep, "event step mismatch");
        reset_fields(s);
        break;
    case EventKind::ReplacedWord: {
        if (e.step != s.step) bad(ErrorCode::WrongStep, "event step mismatch");
        if (!s.scene) bad(ErrorCode::NoScene, "there is no scene to edit");
        if (text::trim(e.payload).empty()) bad(ErrorCode::EmptyPayload, "replacement is blank");
        auto pos = find_whole_word(*s.scene, e.target);
        if (pos == std::string::npos) bad(ErrorCode::WordNotFound, "\"" + e.target + "\" is not in the scene");
        s.scene->replace(pos, e.target.size(), e.payload);
        break;
    }
    case EventKind::Assembled:
        if (!s.scene) bad(ErrorCode::EmptyPrompt, "there is no scene");
        break;
    }
}

void check_effort_counters(const InteractionEvent& e) {
    bool ok = true;
    switch (e.kind) {
    case EventKind::Typed: ok = e.keystroke_count == text::utf8_length(e.payload); break;
    case EventKind::AcceptedSuggestion: ok = e.keystroke_count == 0 && e.pointer_actions == 1; break;
    case EventKind::ReplacedWord: ok = e.keystroke_count == 0 && e.pointer_actions == 2; break;
    default: break;
    }
    if (!ok) {
        throw Error(ErrorCode::CorruptRecord,
                    std::string(to_string(e.kind)) + " event has inconsistent effort counters");
    }
}

Timestamp system_now() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string random_id() {
    thread_local std::mt19937_64 rng{std::random_device{}() ^
                                     static_cast<std::uint64_t>(system_now()) * 0x9E3779B97F4A7C15ULL};
    static constexpr char kHex[] = "0123456789abcdef";
    std::string id;
    for (int i = 0; i < 2; ++i) {
        auto v = rng();
        for (int b = 0; b < 16; ++b) {
            id.push_back(kHex[v & 0xF]);
            v >>= 4;
        }
    }
    return id;
}

}  // namespace

std::optional<std::string> compose_prompt(const Session& session, const AssemblyOptions& options) {
    if (!session.scene) return std::nullopt;
    auto scene = text::collapse_whitespace(*session.scene);
    std::string out;
    std::string style = session.style ? strip_trailing(text::collapse_whitespace(*session.style), ",;:.") : "";
    if (!style.empty()) {
        out = strip_trailing(scene, ",;:.");
        if (out.empty()) {
            out = style;
        } else {
            out += ", ";
            out += style;
        }
    } else {
        out = strip_trailing(scene, ",;:");
    }
    if (out.empty()) return std::nullopt;
    if (options.terminal_period) {
        char last = out.back();
        if (last != '.' && last != '!' && last != '?') out.push_back('.');
    }
    return out;
}

EffortReport effort_report(const Session& session, const AssemblyOptions& options) {
    EffortReport r;
    for (const auto& e : session.events) {
        r.typed_keystrokes += e.keystroke_count;
        r.pointer_actions += e.pointer_actions;
    }
    if (auto prompt = compose_prompt(session, options)) r.prompt_chars = text::utf8_length(*prompt);
    if (r.prompt_chars > 0 && r.typed_keystrokes < r.prompt_chars) {
        r.savings_ratio = static_cast<double>(r.prompt_chars - r.typed_keystrokes) /
                          static_cast<double>(r.prompt_chars);
    }
    return r;
}

std::vector<std::string> scene_words(const Session& session) {
    std::vector<std::string> words = session.subjects;
    words.insert(words.end(), session.actions.begin(), session.actions.end());
    if (words.empty() && session.environment) words.push_back(*session.environment);
    return words;
}

Wizard::Wizard(WizardOptions options) : options_(std::move(options)) {
    if (!options_.clock) options_.clock = system_now;
    if (!options_.id_source) options_.id_source = random_id;
}

Session Wizard::create_session() const {
    Session s;
    s.id = options_.id_source();
    s.created = options_.clock();
    s.updated = s.created;
    return s;
}

Session Wizard::apply(const Session& session, const Action& action) const {
    if (action.expected_step && *action.expected_step != session.step) {
        throw Error(ErrorCode::WrongStep, "action targets " + std::string(to_string(*action.expected_step)) +
                                              " but the session is at " + std::string(to_string(session.step)));
    }

    InteractionEvent e;
    e.step = session.step;
    e.at = options_.clock();
    auto trimmed = std::string(text::trim(action.text));
    switch (action.kind) {
    case ActionKind::TypeText:
        e.kind = EventKind::Typed;
        e.payload = trimmed;
        e.keystroke_count = text::utf8_length(trimmed);
        e.advance = action.advance;
        break;
    case ActionKind::AcceptSuggestion:
        e.kind = EventKind::AcceptedSuggestion;
        e.payload = trimmed;
        e.pointer_actions = 1;
        e.advance = action.advance;
        break;
    case ActionKind::EditSuggestion:
        e.kind = EventKind::EditedSuggestion;
        e.payload = trimmed;
        e.keystroke_count = action.typed_chars;
        e.pointer_actions = 1;
        e.advance = action.advance;
        break;
    case ActionKind::Skip:
        e.kind = EventKind::Skipped;
        e.pointer_actions = 1;
        e.advance = true;
        break;
    case ActionKind::Back:
        e.kind = EventKind::WentBack;
        e.pointer_actions = 1;
        break;
    case ActionKind::Restart:
        e.kind = EventKind::Restarted;
        e.pointer_actions = 1;
        break;
    }

    Session next = session;
    apply_event(next, e);
    next.events.push_back(std::move(e));
    next.updated = next.events.back().at;
    return next;
}

Session Wizard::replace_word(const Session& session, std::string_view target, std::string_view replacement) const {
    InteractionEvent e;
    e.kind = EventKind::ReplacedWord;
    e.step = session.step;
    e.target = std::string(text::trim(target));
    e.payload = std::string(text::trim(replacement));
    e.pointer_actions = 2;
    e.at = options_.clock();

    Session next = session;
    apply_event(next, e);
    next.events.push_back(std::move(e));
    next.updated = next.events.back().at;
    return next;
}

AssembledPrompt Wizard::assemble(Session& session) const {
    auto text = compose_prompt(session, options_.assembly);
    if (!text) throw Error(ErrorCode::EmptyPrompt, "the prompt needs a scene");

    InteractionEvent e;
    e.kind = EventKind::Assembled;
    e.step = session.step;
    e.payload = *text;
    e.at = options_.clock();
    session.events.push_back(std::move(e));
    session.updated = session.events.back().at;

    AssembledPrompt out;
    out.char_count = text::utf8_length(*text);
    out.text = std::move(*text);
    out.effort = effort_report(session, options_.assembly);
    return out;
}

Session Wizard::replay(std::string id, Timestamp created, const std::vector<InteractionEvent>& events) const {
    Session s;
    s.id = std::move(id);
    s.created = created;
    s.updated = created;
    for (const auto& e : events) {
        check_effort_counters(e);
        try {
            apply_event(s, e);
        } catch (const Error& err) {
            throw Error(ErrorCode::CorruptRecord, std::string("event log does not replay: ") + err.what());
        }
        s.events.push_back(e);
        s.updated = e.at;
    }
    return s;
}

}  // namespace promptassist
