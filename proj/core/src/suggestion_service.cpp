#include "promptassist/suggestion_service.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "promptassist/completion_parser.hpp"
#include "promptassist/error.hpp"
#include "promptassist/text.hpp"

namespace promptassist {

std::string_view to_string(SuggestionKind kind) noexcept {
    switch (kind) {
    case SuggestionKind::Environment: return "environment";
    case SuggestionKind::Subjects: return "subjects";
    case SuggestionKind::Actions: return "actions";
    case SuggestionKind::Scene: return "scene";
    case SuggestionKind::Style: return "style";
    case SuggestionKind::Synonyms: return "synonyms";
    }
    return "unknown";
}

std::optional<SuggestionKind> parse_suggestion_kind(std::string_view s) noexcept {
    for (auto k : {SuggestionKind::Environment, SuggestionKind::Subjects, SuggestionKind::Actions,
                   SuggestionKind::Scene, SuggestionKind::Style, SuggestionKind::Synonyms}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

std::vector<std::string> SuggestionConfig::default_style_presets() {
    return {"photograph",      "oil painting",    "watercolor painting", "pencil drawing",
            "charcoal sketch", "digital art",     "pixel art",           "3D render",
            "comic book art",  "monochrome",      "pastel colors",       "impressionist painting",
            "pop art",         "ink illustration", "studio photograph",  "cinematic lighting"};
}

std::optional<SuggestionKind> suggestion_kind_for(Step step) noexcept {
    switch (step) {
    case Step::Environment: return SuggestionKind::Environment;
    case Step::Subjects: return SuggestionKind::Subjects;
    case Step::Actions: return SuggestionKind::Actions;
    case Step::Scene: return SuggestionKind::Scene;
    case Step::Style: return SuggestionKind::Style;
    case Step::Done: break;
    }
    return std::nullopt;
}

std::vector<std::string> default_inputs(SuggestionKind kind, const Session& session) {
    switch (kind) {
    case SuggestionKind::Environment:
    case SuggestionKind::Style: return {};
    case SuggestionKind::Subjects:
        if (!session.environment) throw Error(ErrorCode::InvalidQuery, "no environment has been chosen");
        return {*session.environment};
    case SuggestionKind::Actions:
        if (session.subjects.empty()) throw Error(ErrorCode::InvalidQuery, "no subjects have been chosen");
        return session.subjects;
    case SuggestionKind::Scene: {
        auto words = scene_words(session);
        if (words.empty()) throw Error(ErrorCode::InvalidQuery, "nothing has been chosen to build a scene from");
        return words;
    }
    case SuggestionKind::Synonyms: break;
    }
    throw Error(ErrorCode::InvalidQuery, "synonym suggestions need the word to replace");
}

std::vector<RenderedPrompt> prompts_for(const SuggestionQuery& query, std::span<const Template> templates) {
    auto pick = [&](TemplateId id) -> const Template& {
        return templates.empty() ? builtin_template(id) : find_template(templates, id);
    };
    std::vector<RenderedPrompt> out;
    switch (query.kind) {
    case SuggestionKind::Style: break;
    case SuggestionKind::Environment: out.push_back(render(pick(TemplateId::EnvironmentSuggest), {})); break;
    case SuggestionKind::Subjects:
        out.push_back(render(pick(TemplateId::SubjectsForEnvironment), query.inputs));
        break;
    case SuggestionKind::Synonyms: out.push_back(render(pick(TemplateId::SynonymsForWord), query.inputs)); break;
    case SuggestionKind::Actions:
        for (const auto& subject : query.inputs) {
            out.push_back(render(pick(TemplateId::ActionsForSubjects), std::span<const std::string>(&subject, 1)));
        }
        break;
    case SuggestionKind::Scene: {
        auto joined = join_words(query.inputs);
        out.push_back(render(pick(TemplateId::SceneFromWords), std::span<const std::string>(&joined, 1)));
        break;
    }
    }
    return out;
}

// Accumulates unique items for one suggest() call. Attempt-tag counters are
// staged locally and only committed when the call succeeds, so a cancelled
// or failed call can be retried with the same tags.
class SuggestionService::Run {
public:
    Run(SuggestionService& service, std::span<const std::string> exclude, std::stop_token cancel)
        : service_(service), cancel_(std::move(cancel)) {
        for (const auto& e : exclude) excluded_.insert(text::normalize_key(e));
    }

    /// Raw completion text for one attempt at `prompt`.
    std::string generate(const RenderedPrompt& prompt, int max_tokens, const std::vector<std::string>& stops) {
        GenerationRequest request;
        request.prompt_text = prompt.text;
        request.max_tokens = max_tokens;
        request.temperature = service_.config_.temperature;
        request.stop_sequences = stops;
        request.attempt_tag = std::to_string(take_tag(prompt.text));

        Completion c = service_.client_->generate(request, cancel_);
        if (c.finish_reason == FinishReason::Cancelled) {
            throw Error(ErrorCode::Cancelled, "suggestion request was cancelled");
        }
        if (c.finish_reason == FinishReason::Error) {
            throw Error(c.error.value_or(ErrorCode::BackendUnavailable), "suggestion request timed out");
        }
        return std::move(c.text);
    }

    bool add(std::string_view item, int attempt) {
        auto key = text::normalize_key(item);
        if (key.empty() || excluded_.count(key) != 0 || !seen_.insert(key).second) return false;
        result.items.emplace_back(text::trim(item));
        result.provenance.push_back(attempt);
        return true;
    }

    void commit() {
        std::lock_guard lock(service_.mutex_);
        for (const auto& [digest, next] : staged_tags_) service_.next_tag_[digest] = next;
    }

    SuggestionSet result;
    int parsed_attempts = 0;

private:
    int take_tag(const std::string& prompt_text) {
        auto digest = normalize_digest(prompt_text);
        auto it = staged_tags_.find(digest);
        if (it == staged_tags_.end()) {
            int start = 0;
            {
                std::lock_guard lock(service_.mutex_);
                if (auto found = service_.next_tag_.find(digest); found != service_.next_tag_.end()) {
                    start = found->second;
                }
            }
            it = staged_tags_.emplace(digest, start).first;
        }
        return it->second++;
    }

    SuggestionService& service_;
    std::stop_token cancel_;
    std::unordered_set<std::string> excluded_;
    std::unordered_set<std::string> seen_;
    std::map<std::string, int> staged_tags_;
};

SuggestionService::SuggestionService(std::shared_ptr<const LlmClient> client, SuggestionConfig config)
    : client_(std::move(client)), config_(std::move(config)) {
    if (!client_) throw Error(ErrorCode::InvalidConfig, "suggestion service needs an LLM client");
    if (config_.attempt_budget < 1 || config_.environment_budget < 1) {
        throw Error(ErrorCode::InvalidConfig, "attempt budgets must be at least 1");
    }
    if (config_.default_min_count < 1 || config_.scene_min_count < 1 || config_.max_items_per_completion < 1) {
        throw Error(ErrorCode::InvalidConfig, "suggestion counts must be at least 1");
    }
    for (const auto& t : config_.templates) validate(t);
}

const Template& SuggestionService::template_for(TemplateId id) const {
    if (config_.templates.empty()) return builtin_template(id);
    return find_template(config_.templates, id);
}

int SuggestionService::budget_for(SuggestionKind kind) const noexcept {
    switch (kind) {
    case SuggestionKind::Environment: return config_.environment_budget;
    case SuggestionKind::Style: return 0;
    default: return config_.attempt_budget;
    }
}

std::size_t SuggestionService::min_count_for(const SuggestionQuery& query) const noexcept {
    if (query.min_count) return *query.min_count;
    return query.kind == SuggestionKind::Scene ? config_.scene_min_count : config_.default_min_count;
}

std::string SuggestionService::cache_key(const SuggestionQuery& query) const {
    std::string key(to_string(query.kind));
    key += '\x1e';
    for (const auto& in : query.inputs) {
        key += text::normalize_key(in);
        key += '\x1f';
    }
    key += '\x1e';
    key += std::to_string(min_count_for(query));
    key += '\x1e';
    std::set<std::string> excluded;
    for (const auto& e : query.exclude) excluded.insert(text::normalize_key(e));
    for (const auto& e : excluded) {
        key += e;
        key += '\x1f';
    }
    return key;
}

std::optional<SuggestionSet> SuggestionService::cached(const SuggestionQuery& query) const {
    auto key = cache_key(query);
    std::lock_guard lock(mutex_);
    auto it = cache_.find(key);
    if (it == cache_.end()) return std::nullopt;
    return it->second;
}

namespace {

void require_inputs(const SuggestionQuery& q, std::size_t min, std::size_t max) {
    auto n = q.inputs.size();
    if (n < min || n > max) {
        throw Error(ErrorCode::InvalidQuery, std::string(to_string(q.kind)) + " suggestions take " +
                                                 (min == max ? std::to_string(min)
                                                             : "at least " + std::to_string(min)) +
                                                 " input(s), got " + std::to_string(n));
    }
    for (const auto& in : q.inputs) {
        if (text::trim(in).empty()) throw Error(ErrorCode::InvalidQuery, "suggestion input is blank");
    }
}

}  // namespace

SuggestionSet SuggestionService::suggest(const SuggestionQuery& query, std::stop_token cancel) {
    const std::size_t min_count = min_count_for(query);
    if (min_count < 1) throw Error(ErrorCode::InvalidQuery, "min_count must be at least 1");

    switch (query.kind) {
    case SuggestionKind::Environment: require_inputs(query, 0, 0); break;
    case SuggestionKind::Subjects:
    case SuggestionKind::Synonyms: require_inputs(query, 1, 1); break;
    case SuggestionKind::Actions:
    case SuggestionKind::Scene: require_inputs(query, 1, SIZE_MAX); break;
    case SuggestionKind::Style: require_inputs(query, 0, 0); break;
    }

    if (auto hit = cached(query)) return *hit;

    if (query.kind == SuggestionKind::Scene) {
        return suggest_scenes(query.inputs, min_count, query.exclude, std::move(cancel));
    }

    Run run(*this, query.exclude, cancel);
    const int budget = budget_for(query.kind);
    auto& attempts = run.result.attempts_used;

    switch (query.kind) {
    case SuggestionKind::Style:
        for (const auto& preset : config_.style_presets) run.add(preset, 0);
        break;

    case SuggestionKind::Environment: {
        auto prompt = render(template_for(TemplateId::EnvironmentSuggest), {});
        const auto& stops = template_for(TemplateId::EnvironmentSuggest).stop_sequences;
        while (run.result.items.size() < min_count && attempts < budget) {
            ++attempts;
            auto raw = run.generate(prompt, config_.list_max_tokens, stops);
            try {
                run.add(parse_single_value(raw), attempts);
                ++run.parsed_attempts;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoSuggestions) throw;
            }
        }
        break;
    }

    case SuggestionKind::Subjects:
    case SuggestionKind::Synonyms: {
        auto id = query.kind == SuggestionKind::Subjects ? TemplateId::SubjectsForEnvironment
                                                         : TemplateId::SynonymsForWord;
        const auto& tmpl = template_for(id);
        auto prompt = render(tmpl, query.inputs);
        while (run.result.items.size() < min_count && attempts < budget) {
            ++attempts;
            auto raw = run.generate(prompt, config_.list_max_tokens, tmpl.stop_sequences);
            try {
                auto parsed = parse_comma_list(raw, config_.max_items_per_completion);
                ++run.parsed_attempts;
                for (const auto& item : parsed.items) run.add(item, attempts);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoSuggestions) throw;
            }
        }
        break;
    }

    case SuggestionKind::Actions: {
        const auto& tmpl = template_for(TemplateId::ActionsForSubjects);
        std::vector<RenderedPrompt> prompts;
        for (const auto& subject : query.inputs) {
            prompts.push_back(render(tmpl, std::span<const std::string>(&subject, 1)));
        }
        while (run.result.items.size() < min_count && attempts < budget) {
            ++attempts;
            std::vector<std::vector<std::string>> per_subject;
            for (const auto& prompt : prompts) {
                auto raw = run.generate(prompt, config_.list_max_tokens, tmpl.stop_sequences);
                try {
                    per_subject.push_back(parse_comma_list(raw, config_.max_items_per_completion).items);
                    ++run.parsed_attempts;
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::NoSuggestions) throw;
                }
            }
            // Round-robin so every subject contributes early items.
            std::size_t longest = 0;
            for (const auto& list : per_subject) longest = std::max(longest, list.size());
            for (std::size_t i = 0; i < longest; ++i) {
                for (const auto& list : per_subject) {
                    if (i < list.size()) run.add(list[i], attempts);
                }
            }
        }
        break;
    }

    case SuggestionKind::Scene: break;  // handled above
    }

    if (budget > 0 && run.parsed_attempts == 0) {
        throw Error(ErrorCode::NoSuggestions, "the model returned no usable suggestions");
    }
    run.result.exhausted = run.result.items.size() < min_count;
    run.commit();

    std::lock_guard lock(mutex_);
    cache_[cache_key(query)] = run.result;
    return run.result;
}

SuggestionSet SuggestionService::suggest_scenes(std::span<const std::string> words,
                                                std::optional<std::size_t> min_count_opt,
                                                std::span<const std::string> exclude, std::stop_token cancel) {
    SuggestionQuery query{SuggestionKind::Scene, {words.begin(), words.end()}, min_count_opt,
                          {exclude.begin(), exclude.end()}};
    const std::size_t min_count = min_count_for(query);
    if (min_count < 1) throw Error(ErrorCode::InvalidQuery, "min_count must be at least 1");
    if (words.empty()) throw Error(ErrorCode::InvalidQuery, "scene suggestions need at least one word");
    if (auto hit = cached(query)) return *hit;

    const auto& tmpl = template_for(TemplateId::SceneFromWords);
    std::string joined;
    try {
        joined = join_words(words);
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidQuery, e.what());
    }
    auto prompt = render(tmpl, std::span<const std::string>(&joined, 1));

    Run run(*this, exclude, std::move(cancel));
    const int budget = budget_for(SuggestionKind::Scene);
    auto& attempts = run.result.attempts_used;
    while (run.result.items.size() < min_count && attempts < budget) {
        ++attempts;
        auto raw = run.generate(prompt, config_.scene_max_tokens, tmpl.stop_sequences);
        try {
            run.add(parse_scene(raw).text, attempts);
            ++run.parsed_attempts;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoSuggestions) throw;
        }
    }
    if (run.parsed_attempts == 0) throw Error(ErrorCode::NoSuggestions, "the model returned no usable scene");
    run.result.exhausted = run.result.items.size() < min_count;
    run.commit();

    std::lock_guard lock(mutex_);
    cache_[cache_key(query)] = run.result;
    return run.result;
}

}  // namespace promptassist
