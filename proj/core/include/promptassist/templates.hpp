#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace promptassist {

enum class TemplateId {
    EnvironmentSuggest,
    SubjectsForEnvironment,
    ActionsForSubjects,
    SceneFromWords,
    SynonymsForWord,
};

enum class OutputGrammar { SingleValue, CommaList, SceneText };

std::string_view to_string(TemplateId id) noexcept;
std::string_view to_string(OutputGrammar grammar) noexcept;
std::optional<TemplateId> parse_template_id(std::string_view s) noexcept;
std::optional<OutputGrammar> parse_output_grammar(std::string_view s) noexcept;

inline constexpr std::string_view kInputMarker = "<input>";
inline constexpr std::string_view kOutputMarker = "<output>";

/// A few-shot prompt body. The body ends at the output marker; the model is
/// expected to continue the last labelled line.
struct Template {
    TemplateId id{};
    std::string body;
    int input_arity = 0;
    OutputGrammar output_grammar = OutputGrammar::CommaList;
    std::vector<std::string> stop_sequences;
};

struct RenderedPrompt {
    TemplateId template_id{};
    std::string text;
    std::vector<std::string> inputs;
};

/// Throws Error{InvalidTemplate} when the marker counts, the marker position
/// or the stop list are wrong.
void validate(const Template& tmpl);

/// The five few-shot templates used by the suggestion engine.
const std::vector<Template>& builtin_templates();
const Template& builtin_template(TemplateId id);

/// Substitutes inputs (trimmed) into the input markers in order and drops the
/// output marker along with the spaces before it.
/// Throws ArityMismatch, EmptyInput, or InvalidTemplate.
RenderedPrompt render(const Template& tmpl, std::span<const std::string> inputs);

/// "a, b, c" as used by the scene template's word list. Throws EmptyList or
/// EmptyInput.
std::string join_words(std::span<const std::string> words);

// Template packs: a directory with manifest.json plus one <id>.txt body per
// template. Manifest entries: {"id", "file", "input_arity", "output_grammar",
// "stop_sequences"}.
std::vector<Template> load_template_pack(const std::filesystem::path& dir);
void write_template_pack(const std::filesystem::path& dir, std::span<const Template> templates);

/// Lookup by id within an arbitrary set (for example a loaded pack).
const Template& find_template(std::span<const Template> templates, TemplateId id);

}  // namespace promptassist
