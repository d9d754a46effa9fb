#include "promptassist/json_io.hpp"

#include "promptassist/error.hpp"

namespace promptassist::json_io {

namespace {

nlohmann::json optional_string(const std::optional<std::string>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const InteractionEvent& e) {
    nlohmann::json j{{"kind", to_string(e.kind)},
                     {"step", to_string(e.step)},
                     {"payload", e.payload},
                     {"keystroke_count", e.keystroke_count},
                     {"pointer_actions", e.pointer_actions},
                     {"advance", e.advance},
                     {"at_ms", e.at}};
    if (e.kind == EventKind::ReplacedWord) j["target"] = e.target;
    return j;
}

InteractionEvent event_from_json(const nlohmann::json& j) {
    try {
        InteractionEvent e;
        auto kind = parse_event_kind(j.at("kind").get<std::string>());
        auto step = parse_step(j.at("step").get<std::string>());
        if (!kind || !step) throw Error(ErrorCode::CorruptRecord, "unknown event kind or step");
        e.kind = *kind;
        e.step = *step;
        e.payload = j.at("payload").get<std::string>();
        e.target = j.value("target", std::string{});
        e.keystroke_count = j.at("keystroke_count").get<std::size_t>();
        e.pointer_actions = j.at("pointer_actions").get<std::size_t>();
        e.advance = j.at("advance").get<bool>();
        e.at = j.at("at_ms").get<Timestamp>();
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::CorruptRecord, std::string("malformed event: ") + ex.what());
    }
}

nlohmann::json state_to_json(const Session& s) {
    return {{"step", to_string(s.step)},
            {"environment", optional_string(s.environment)},
            {"subjects", s.subjects},
            {"actions", s.actions},
            {"scene", optional_string(s.scene)},
            {"style", optional_string(s.style)}};
}

nlohmann::json to_json(const Session& s) {
    auto j = state_to_json(s);
    j["id"] = s.id;
    j["created_at_ms"] = s.created;
    j["updated_at_ms"] = s.updated;
    auto events = nlohmann::json::array();
    for (const auto& e : s.events) events.push_back(to_json(e));
    j["events"] = std::move(events);
    return j;
}

nlohmann::json to_json(const SuggestionSet& set) {
    return {{"items", set.items},
            {"provenance", set.provenance},
            {"exhausted", set.exhausted},
            {"attempts_used", set.attempts_used}};
}

nlohmann::json to_json(const EffortReport& r) {
    return {{"typed_keystrokes", r.typed_keystrokes},
            {"pointer_actions", r.pointer_actions},
            {"prompt_chars", r.prompt_chars},
            {"savings_ratio", r.savings_ratio}};
}

nlohmann::json to_json(const AssembledPrompt& p) {
    return {{"text", p.text}, {"char_count", p.char_count}, {"effort", to_json(p.effort)}};
}

}  // namespace promptassist::json_io
