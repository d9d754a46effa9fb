#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "promptassist/llm_client.hpp"
#include "promptassist/templates.hpp"
#include "promptassist/wizard.hpp"

namespace promptassist {

enum class SuggestionKind { Environment, Subjects, Actions, Scene, Style, Synonyms };

std::string_view to_string(SuggestionKind kind) noexcept;
std::optional<SuggestionKind> parse_suggestion_kind(std::string_view s) noexcept;

struct SuggestionQuery {
    SuggestionKind kind = SuggestionKind::Subjects;
    /// Environment: none. Subjects: {environment}. Actions: one or more
    /// subjects. Scene: one or more words. Synonyms: {word}. Style: none.
    std::vector<std::string> inputs;
    /// Defaults to SuggestionConfig::default_min_count (scene_min_count for
    /// scenes).
    std::optional<std::size_t> min_count;
    std::vector<std::string> exclude;
};

struct SuggestionSet {
    std::vector<std::string> items;
    /// 1-based attempt that produced items[i].
    std::vector<int> provenance;
    bool exhausted = false;
    int attempts_used = 0;

    friend bool operator==(const SuggestionSet&, const SuggestionSet&) = default;
};

struct SuggestionConfig {
    /// Generate calls per suggest() for list and scene kinds. For actions with
    /// several subjects one attempt is one call per subject.
    int attempt_budget = 3;
    /// The environment template yields one value per call, so it gets its own
    /// larger budget.
    int environment_budget = 20;
    std::size_t default_min_count = 10;
    std::size_t scene_min_count = 3;
    std::size_t max_items_per_completion = 50;
    int list_max_tokens = 64;
    int scene_max_tokens = 128;
    double temperature = 0.7;
    /// Served for the style step without a model call.
    std::vector<std::string> style_presets = default_style_presets();
    /// Empty means builtin_templates().
    std::vector<Template> templates;

    static std::vector<std::string> default_style_presets();
};

/// The suggestion kind offered at a wizard step; nullopt for Done.
std::optional<SuggestionKind> suggestion_kind_for(Step step) noexcept;

/// Inputs a query takes from the session when the caller gives none:
/// subjects <- environment, actions <- subjects, scene <- scene_words().
/// Throws Error{InvalidQuery} when the session lacks them; synonyms always
/// need explicit inputs.
std::vector<std::string> default_inputs(SuggestionKind kind, const Session& session);

/// The prompts one attempt of `query` sends to the model (one per subject for
/// actions, none for style). `templates` empty means the builtin set.
std::vector<RenderedPrompt> prompts_for(const SuggestionQuery& query, std::span<const Template> templates = {});

/// Turns wizard queries into de-duplicated suggestion lists. One instance
/// holds one session's cache and regeneration counters; the LlmClient may be
/// shared. All members are thread-safe.
class SuggestionService {
public:
    explicit SuggestionService(std::shared_ptr<const LlmClient> client, SuggestionConfig config = {});

    /// Throws InvalidQuery, Cancelled, Timeout, NoSuggestions, or whatever the
    /// backend raises (BackendUnavailable, MissingFixture).
    SuggestionSet suggest(const SuggestionQuery& query, std::stop_token cancel = {});

    SuggestionSet suggest_scenes(std::span<const std::string> words, std::optional<std::size_t> min_count,
                                 std::span<const std::string> exclude, std::stop_token cancel = {});

    /// A previously served result for the same kind, inputs, min_count and
    /// exclude set.
    [[nodiscard]] std::optional<SuggestionSet> cached(const SuggestionQuery& query) const;

    [[nodiscard]] int budget_for(SuggestionKind kind) const noexcept;
    [[nodiscard]] std::size_t min_count_for(const SuggestionQuery& query) const noexcept;
    [[nodiscard]] const SuggestionConfig& config() const noexcept { return config_; }

private:
    class Run;

    const Template& template_for(TemplateId id) const;
    [[nodiscard]] std::string cache_key(const SuggestionQuery& query) const;

    std::shared_ptr<const LlmClient> client_;
    SuggestionConfig config_;

    mutable std::mutex mutex_;
    std::map<std::string, SuggestionSet> cache_;
    /// Next attempt tag per rendered prompt digest.
    std::map<std::string, int> next_tag_;
};

}  // namespace promptassist
