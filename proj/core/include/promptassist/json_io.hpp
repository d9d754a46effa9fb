#pragma once

#include <nlohmann/json.hpp>

#include "promptassist/suggestion_service.hpp"
#include "promptassist/wizard.hpp"

// JSON shapes shared by the session files, the HTTP API and the CLI's --json
// output. Schemas live in docs/schema/.
namespace promptassist::json_io {

nlohmann::json to_json(const InteractionEvent& event);
/// Throws Error{CorruptRecord} on a malformed event.
InteractionEvent event_from_json(const nlohmann::json& j);

/// Snapshot fields only (step and selections).
nlohmann::json state_to_json(const Session& session);
/// Full session: id, timestamps, state and event log.
nlohmann::json to_json(const Session& session);

nlohmann::json to_json(const SuggestionSet& set);
nlohmann::json to_json(const EffortReport& report);
nlohmann::json to_json(const AssembledPrompt& prompt);

}  // namespace promptassist::json_io
