#include "promptassist/templates.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "atomic_file.hpp"
#include "promptassist/error.hpp"
#include "promptassist/text.hpp"

namespace promptassist {

namespace {

// Line wraps and trailing blanks from the typeset listings are removed; the
// remaining bytes (including "replacements" without a colon and the stray
// commas at the end of some scenes) are kept as the model saw them.

constexpr std::string_view kEnvironmentSuggestBody =
    R"(Name: environment
Suggestion: university
Name: environment
Suggestion: ocean
Name: environment
Suggestion: hospital
Name: environment
Suggestion: <output>)";

constexpr std::string_view kSubjectsForEnvironmentBody =
    R"(Environment: school
Suggestions: blackboard, teacher, chair, book, student, class, eraser, whiteboard, notebook, pen, pencil, eraser, paper
Environment: work office
Suggestions: desk, computer, pen, paper sheet, folder, fax, phone, pencil, paper shredder, light
Environment: forest
Suggestions: tree, animal, bird, monkey, lion, fox, eagle, plant, flower, insect, tiger, horse, wolf
Environment: home
Suggestions: TV, bed, table, sofa, couch, light, console table, remote control, carpet, rug, room, kitchen
Environment: sea
Suggestions: fish, jelly fish, star fish, shark, dolphin, whale, island, boat, ship, coral, crab
Environment: <input>
Suggestions: <output>)";

constexpr std::string_view kActionsForSubjectsBody =
    R"(word: tv
verbs: watch, work, fix, turn on, turn off, turn up, turn down, put, pick up
word: cat
verbs: play, eat, sit, run jump, scratch, pet, sleep, feed, jump, meow, brush, groom, bathe, cuddle, love
word: pool
verbs: fill, swim, drawn, go down, dive, jump, splash, play, go down, drink, eat, throw, throw up, spit, pee, pee in
word: paper
verbs: write, read, draw, cut, tear, color, crumple, make, throw, pick up, put down, fold, take, give, put away, color, spin
word: <input>
verbs: <output>)";

constexpr std::string_view kSceneFromWordsBody =
    R"(words: dog
scene: A small dachshund doing a kickflip on a skateboard
words: cat, tree
scene: A young DSH cat sitting on a small tree branch with leaves in a garden
words: space, rocket
scene: A black and white space ship with a rocket attached to the engine. There is a trail of smoke following the rocket flying through the space full of planets and stars
words: chair, cup, parrot
scene: A parrot with a blue feather and a black/grey beak sitting on a high-backed chair. There is a small table next to the chair and a red cup of tea on the table
words: fish, waves
scene: A red snapper fish with a white body and black eyes and mouth is swimming through the waves at the ocean
words: flying car, fly, bird
scene: a flying car is driving in the sky and a bird is flying next to the car
words: paper sheet, fold, folder
scene: a paper sheet is being folded on a blue folder with a white paperclip on it
words: sofa, sleep
scene: A man is sleeping on the sofa. He has a red t-shirt, blue shorts and brown hair,
words: monkey, swing, tree
scene: A small monkey is swinging on a tree branch. There is a red banana next to the branch
words: take blood from
scene: A doctor is taking blood from a syringe and putting it in a small tube,
words: eiffel tower, old man, old woman
scene: An old man and an old woman are drinking wine next to the eiffel tower.,
words: cat, mouse
scene: An outdoor cat patiently waiting by a mouse hole for its next meal.
words: <input>
scene: <output>)";

constexpr std::string_view kSynonymsForWordBody =
    R"(word: blue
replacements red, pink, orange, yellow, purple, green, brown
word: small
replacements big, tiny, giant, medium, large, huge, miniature
word: young
replacements old, adult, child, teenager, infant, baby, middle-aged
word: <input>
replacements <output>)";

std::vector<std::string> line_stops() { return {"\n"}; }
std::vector<std::string> scene_stops() { return {"\nwords:", "\n\n"}; }

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string_view::npos;
         pos = haystack.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

std::vector<Template> make_builtins() {
    std::vector<Template> out{
        {TemplateId::EnvironmentSuggest, std::string(kEnvironmentSuggestBody), 0,
         OutputGrammar::SingleValue, line_stops()},
        {TemplateId::SubjectsForEnvironment, std::string(kSubjectsForEnvironmentBody), 1,
         OutputGrammar::CommaList, line_stops()},
        {TemplateId::ActionsForSubjects, std::string(kActionsForSubjectsBody), 1,
         OutputGrammar::CommaList, line_stops()},
        {TemplateId::SceneFromWords, std::string(kSceneFromWordsBody), 1,
         OutputGrammar::SceneText, scene_stops()},
        {TemplateId::SynonymsForWord, std::string(kSynonymsForWordBody), 1,
         OutputGrammar::CommaList, line_stops()},
    };
    for (const auto& t : out) validate(t);
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string_view to_string(TemplateId id) noexcept {
    switch (id) {
    case TemplateId::EnvironmentSuggest: return "environment_suggest";
    case TemplateId::SubjectsForEnvironment: return "subjects_for_environment";
    case TemplateId::ActionsForSubjects: return "actions_for_subjects";
    case TemplateId::SceneFromWords: return "scene_from_words";
    case TemplateId::SynonymsForWord: return "synonyms_for_word";
    }
    return "unknown";
}

std::string_view to_string(OutputGrammar grammar) noexcept {
    switch (grammar) {
    case OutputGrammar::SingleValue: return "single_value";
    case OutputGrammar::CommaList: return "comma_list";
    case OutputGrammar::SceneText: return "scene_text";
    }
    return "unknown";
}

std::optional<TemplateId> parse_template_id(std::string_view s) noexcept {
    for (auto id : {TemplateId::EnvironmentSuggest, TemplateId::SubjectsForEnvironment,
                    TemplateId::ActionsForSubjects, TemplateId::SceneFromWords,
                    TemplateId::SynonymsForWord}) {
        if (to_string(id) == s) return id;
    }
    return std::nullopt;
}

std::optional<OutputGrammar> parse_output_grammar(std::string_view s) noexcept {
    for (auto g : {OutputGrammar::SingleValue, OutputGrammar::CommaList, OutputGrammar::SceneText}) {
        if (to_string(g) == s) return g;
    }
    return std::nullopt;
}

void validate(const Template& tmpl) {
    const std::string name(to_string(tmpl.id));
    if (tmpl.input_arity < 0) {
        throw Error(ErrorCode::InvalidTemplate, name + ": negative input arity");
    }
    if (count_occurrences(tmpl.body, kInputMarker) != static_cast<std::size_t>(tmpl.input_arity)) {
        throw Error(ErrorCode::InvalidTemplate,
                    name + ": input marker count does not match arity " +
                        std::to_string(tmpl.input_arity));
    }
    if (count_occurrences(tmpl.body, kOutputMarker) != 1) {
        throw Error(ErrorCode::InvalidTemplate, name + ": expected exactly one output marker");
    }
    auto tail = text::trim_right(tmpl.body);
    if (tail.size() < kOutputMarker.size() ||
        tail.substr(tail.size() - kOutputMarker.size()) != kOutputMarker) {
        throw Error(ErrorCode::InvalidTemplate, name + ": output marker must end the body");
    }
    if (tmpl.stop_sequences.empty()) {
        throw Error(ErrorCode::InvalidTemplate, name + ": no stop sequences");
    }
    for (const auto& stop : tmpl.stop_sequences) {
        if (stop.empty()) throw Error(ErrorCode::InvalidTemplate, name + ": empty stop sequence");
    }
}

const std::vector<Template>& builtin_templates() {
    static const std::vector<Template> templates = make_builtins();
    return templates;
}

const Template& find_template(std::span<const Template> templates, TemplateId id) {
    for (const auto& t : templates) {
        if (t.id == id) return t;
    }
    throw Error(ErrorCode::InvalidTemplate, "no template named " + std::string(to_string(id)));
}

const Template& builtin_template(TemplateId id) {
    return find_template(builtin_templates(), id);
}

RenderedPrompt render(const Template& tmpl, std::span<const std::string> inputs) {
    if (inputs.size() != static_cast<std::size_t>(tmpl.input_arity)) {
        throw Error(ErrorCode::ArityMismatch,
                    std::string(to_string(tmpl.id)) + " takes " + std::to_string(tmpl.input_arity) +
                        " input(s), got " + std::to_string(inputs.size()));
    }
    RenderedPrompt out{tmpl.id, {}, {}};
    out.inputs.reserve(inputs.size());
    for (const auto& raw : inputs) {
        auto value = text::trim(raw);
        if (value.empty()) throw Error(ErrorCode::EmptyInput, "template input is blank");
        if (value.find(kInputMarker) != std::string_view::npos ||
            value.find(kOutputMarker) != std::string_view::npos) {
            throw Error(ErrorCode::EmptyInput, "template input contains a placeholder marker");
        }
        out.inputs.emplace_back(value);
    }

    std::string_view body = tmpl.body;
    auto output_pos = body.rfind(kOutputMarker);
    auto head = text::trim_right(body.substr(0, output_pos));
    // Anything between the label and the marker is horizontal space only.
    auto label_end = head.size();

    std::string& result = out.text;
    result.reserve(body.size() + 64);
    std::size_t cursor = 0;
    std::size_t next_input = 0;
    while (cursor < label_end) {
        auto pos = body.find(kInputMarker, cursor);
        if (pos == std::string_view::npos || pos >= label_end) {
            result.append(body.substr(cursor, label_end - cursor));
            break;
        }
        result.append(body.substr(cursor, pos - cursor));
        result.append(out.inputs[next_input++]);
        cursor = pos + kInputMarker.size();
    }
    return out;
}

std::string join_words(std::span<const std::string> words) {
    if (words.empty()) throw Error(ErrorCode::EmptyList, "word list is empty");
    std::string out;
    for (const auto& w : words) {
        auto value = text::trim(w);
        if (value.empty()) throw Error(ErrorCode::EmptyInput, "word list contains a blank word");
        if (!out.empty()) out += ", ";
        out.append(value);
    }
    return out;
}

std::vector<Template> load_template_pack(const std::filesystem::path& dir) {
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidTemplate, std::string("bad template manifest: ") + e.what());
    }
    if (!manifest.is_object() || !manifest.contains("templates") || !manifest["templates"].is_array()) {
        throw Error(ErrorCode::InvalidTemplate, "template manifest needs a \"templates\" array");
    }
    std::vector<Template> out;
    for (const auto& entry : manifest["templates"]) {
        try {
            auto id = parse_template_id(entry.at("id").get<std::string>());
            auto grammar = parse_output_grammar(entry.at("output_grammar").get<std::string>());
            if (!id || !grammar) {
                throw Error(ErrorCode::InvalidTemplate, "unknown template id or grammar in manifest");
            }
            auto file = entry.value("file", std::string(to_string(*id)) + ".txt");
            auto rel = std::filesystem::path(file);
            if (rel.is_absolute() || rel.has_parent_path()) {
                throw Error(ErrorCode::InvalidTemplate, "template file must be a plain file name");
            }
            Template t{*id, read_file(dir / rel), entry.at("input_arity").get<int>(), *grammar,
                       entry.at("stop_sequences").get<std::vector<std::string>>()};
            // Editors like to append a final newline; it carries no meaning.
            t.body = std::string(text::trim_right(t.body));
            validate(t);
            out.push_back(std::move(t));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::InvalidTemplate, std::string("bad template manifest entry: ") + e.what());
        }
    }
    return out;
}

void write_template_pack(const std::filesystem::path& dir, std::span<const Template> templates) {
    std::filesystem::create_directories(dir);
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& t : templates) {
        validate(t);
        auto file = std::string(to_string(t.id)) + ".txt";
        detail::write_file_atomically(dir / file, t.body + "\n");
        entries.push_back({{"id", to_string(t.id)},
                           {"file", file},
                           {"input_arity", t.input_arity},
                           {"output_grammar", to_string(t.output_grammar)},
                           {"stop_sequences", t.stop_sequences}});
    }
    nlohmann::json manifest{{"templates", entries}};
    detail::write_file_atomically(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace promptassist
