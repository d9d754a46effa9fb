#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace promptassist {

enum class Step { Environment, Subjects, Actions, Scene, Style, Done };

std::string_view to_string(Step step) noexcept;
std::optional<Step> parse_step(std::string_view s) noexcept;

enum class EventKind {
    Typed,
    AcceptedSuggestion,
    EditedSuggestion,
    Skipped,
    WentBack,
    Restarted,
    ReplacedWord,
    Assembled,
};

std::string_view to_string(EventKind kind) noexcept;
std::optional<EventKind> parse_event_kind(std::string_view s) noexcept;

/// Milliseconds since the Unix epoch.
using Timestamp = std::int64_t;

struct InteractionEvent {
    EventKind kind = EventKind::Typed;
    /// The step the event was applied at.
    Step step = Step::Environment;
    std::string payload;
    /// Only for ReplacedWord: the word that was replaced.
    std::string target;
    std::size_t keystroke_count = 0;
    std::size_t pointer_actions = 0;
    /// Whether the event moved the wizard to the next step.
    bool advance = false;
    Timestamp at = 0;

    friend bool operator==(const InteractionEvent&, const InteractionEvent&) = default;
};

struct Session {
    std::string id;
    Step step = Step::Environment;
    std::optional<std::string> environment;
    std::vector<std::string> subjects;
    std::vector<std::string> actions;
    std::optional<std::string> scene;
    std::optional<std::string> style;
    std::vector<InteractionEvent> events;
    Timestamp created = 0;
    Timestamp updated = 0;

    friend bool operator==(const Session&, const Session&) = default;
};

/// Field state only (step and selections), ignoring id, log and timestamps.
bool same_state(const Session& a, const Session& b);

enum class ActionKind { TypeText, AcceptSuggestion, EditSuggestion, Skip, Back, Restart };

std::string_view to_string(ActionKind kind) noexcept;
std::optional<ActionKind> parse_action_kind(std::string_view s) noexcept;

struct Action {
    ActionKind kind = ActionKind::TypeText;
    std::string text;
    /// Move on after applying. Multi-select steps (Subjects, Actions) pass
    /// false for all but the last selection.
    bool advance = true;
    /// EditSuggestion only: characters the user typed while editing.
    std::size_t typed_chars = 0;
    /// When set, the action is rejected with WrongStep unless the session is
    /// at this step (guards against stale clients).
    std::optional<Step> expected_step;

    static Action type(std::string text, bool advance = true) {
        return {ActionKind::TypeText, std::move(text), advance, 0, std::nullopt};
    }
    static Action accept(std::string text, bool advance = true) {
        return {ActionKind::AcceptSuggestion, std::move(text), advance, 0, std::nullopt};
    }
    static Action edit(std::string text, std::size_t typed_chars, bool advance = true) {
        return {ActionKind::EditSuggestion, std::move(text), advance, typed_chars, std::nullopt};
    }
    static Action skip() { return {ActionKind::Skip, {}, true, 0, std::nullopt}; }
    static Action back() { return {ActionKind::Back, {}, false, 0, std::nullopt}; }
    static Action restart() { return {ActionKind::Restart, {}, false, 0, std::nullopt}; }
};

struct EffortReport {
    std::size_t typed_keystrokes = 0;
    std::size_t pointer_actions = 0;
    std::size_t prompt_chars = 0;
    /// (prompt_chars - typed_keystrokes) / prompt_chars, floored at 0; 0 when
    /// there is no prompt yet.
    double savings_ratio = 0.0;

    friend bool operator==(const EffortReport&, const EffortReport&) = default;
};

struct AssembledPrompt {
    std::string text;
    std::size_t char_count = 0;
    EffortReport effort;
};

struct AssemblyOptions {
    /// Append '.' to the final prompt.
    bool terminal_period = false;
};

struct WizardOptions {
    std::function<Timestamp()> clock;         // defaults to the system clock
    std::function<std::string()> id_source;   // defaults to random 128-bit hex
    AssemblyOptions assembly;
};

/// Scene text plus optional style, or nullopt without a scene.
std::optional<std::string> compose_prompt(const Session& session, const AssemblyOptions& options = {});

/// Pure function of the event log (the prompt length uses compose_prompt).
EffortReport effort_report(const Session& session, const AssemblyOptions& options = {});

/// Words for the scene template: subjects then actions; the environment when
/// both are empty; empty when nothing is selected.
std::vector<std::string> scene_words(const Session& session);

/// The five-step prompt wizard. Sessions are values: every operation returns
/// a new Session and leaves its argument untouched, including on error.
class Wizard {
public:
    explicit Wizard(WizardOptions options = {});

    [[nodiscard]] Session create_session() const;

    /// Throws WrongStep, SkipNotAllowed or EmptyPayload.
    [[nodiscard]] Session apply(const Session& session, const Action& action) const;

    /// Replaces the first whole-word occurrence of `target` in the scene.
    /// Throws NoScene, WordNotFound or EmptyPayload.
    [[nodiscard]] Session replace_word(const Session& session, std::string_view target,
                                       std::string_view replacement) const;

    /// Throws EmptyPrompt without a scene. On success the session gains an
    /// Assembled event.
    AssembledPrompt assemble(Session& session) const;

    /// Rebuilds field state by re-applying `events` to an empty session.
    /// Throws CorruptRecord when an event cannot be applied.
    [[nodiscard]] Session replay(std::string id, Timestamp created,
                                 const std::vector<InteractionEvent>& events) const;

    [[nodiscard]] const WizardOptions& options() const noexcept { return options_; }

private:
    WizardOptions options_;
};

}  // namespace promptassist
