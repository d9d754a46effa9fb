#include "cli.hpp"

#include <algorithm>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "promptassist/api_service.hpp"
#include "promptassist/error.hpp"
#include "promptassist/fixture_store.hpp"
#include "promptassist/json_io.hpp"
#include "promptassist/persistence.hpp"
#include "promptassist/suggestion_service.hpp"
#include "promptassist/templates.hpp"
#include "promptassist/text.hpp"
#include "promptassist/wizard.hpp"
#include "script.hpp"

namespace promptassist::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::BackendUnavailable:
    case ErrorCode::Timeout:
    case ErrorCode::Cancelled:
    case ErrorCode::MissingFixture:
    case ErrorCode::RecordingDisabled:
    case ErrorCode::NoSuggestions:
    case ErrorCode::StorageFull:
    case ErrorCode::SerializationFailure:
    case ErrorCode::IoError:
        return kBackend;
    default:
        return kUsage;
    }
}

std::string code_name(ErrorCode code) { return api::map_error(code, false).code; }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json_file(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw UsageError(path + " is not valid JSON: " + e.what());
    }
}

SuggestionKind parse_kind(const std::string& step) {
    auto kind = parse_suggestion_kind(step);
    if (!kind) {
        throw UsageError("unknown step \"" + step +
                         "\"; expected environment, subjects, actions, scene, style or synonyms");
    }
    return *kind;
}

struct BackendFlags {
    std::string config;
    std::string fixtures;
    std::string backend;

    void add_to(CLI::App& app, bool with_fixtures = true) {
        app.add_option("--config", config, "JSON config file (overrides PROMPTASSIST_CONFIG)");
        if (with_fixtures) app.add_option("--fixtures", fixtures, "Replay completions from this fixture file");
        app.add_option("--backend", backend, "Base URL of a live completion server");
    }

    EngineConfig resolve(const EnvLookup& env) const {
        if (!fixtures.empty() && !backend.empty()) throw UsageError("use either --fixtures or --backend, not both");
        std::optional<std::filesystem::path> file;
        if (!config.empty()) file = config;
        EngineConfig cfg = load_config(file, env);
        if (!fixtures.empty()) {
            cfg.mode = BackendMode::Fixture;
            cfg.fixture_path = fixtures;
        }
        if (!backend.empty()) {
            cfg.mode = BackendMode::Live;
            cfg.backend_url = backend;
        }
        return cfg;
    }
};

// Configuration problems are the caller's to fix.
Engine build_engine(const EngineConfig& cfg) {
    try {
        return make_engine(cfg);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

std::vector<std::string> read_lines(const std::string& path) {
    std::vector<std::string> out;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        auto t = text::trim(line);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

// ---- suggest --------------------------------------------------------------

struct SuggestFlags {
    BackendFlags backend;
    std::string step;
    std::vector<std::string> inputs;
    std::size_t count = 0;
    std::string exclude_file;
    bool json_output = false;
};

int run_suggest(const SuggestFlags& flags, CliEnvironment& io) {
    Engine engine = build_engine(flags.backend.resolve(io.env));
    SuggestionQuery query;
    query.kind = parse_kind(flags.step);
    query.inputs = flags.inputs;
    if (flags.count > 0) query.min_count = flags.count;
    if (!flags.exclude_file.empty()) query.exclude = read_lines(flags.exclude_file);

    SuggestionService service(engine.client, engine.suggestion);
    SuggestionSet set = service.suggest(query, io.cancel);
    engine.flush_recordings();

    if (flags.json_output) {
        io.out << json_io::to_json(set).dump() << "\n";
    } else {
        for (const auto& item : set.items) io.out << item << "\n";
    }
    if (set.exhausted) {
        io.err << "only " << set.items.size() << " of " << service.min_count_for(query)
               << " requested suggestions were found\n";
        return kExhausted;
    }
    return kOk;
}

// ---- wizard ---------------------------------------------------------------

struct WizardFlags {
    BackendFlags backend;
    std::string script;
};

int run_wizard(const WizardFlags& flags, CliEnvironment& io) {
    std::vector<ScriptCommand> commands;
    if (flags.script.empty()) {
        commands = parse_script(io.in);
    } else {
        std::istringstream in(read_file(flags.script));
        commands = parse_script(in);
    }

    Engine engine = build_engine(flags.backend.resolve(io.env));
    Wizard wizard;
    SuggestionService service(engine.client, engine.suggestion);
    Session session = wizard.create_session();

    std::vector<std::string> shown;
    std::vector<std::string> seen;
    std::optional<Step> shown_step;

    auto shown_item = [&](const ScriptCommand& cmd) -> const std::string& {
        if (shown_step != session.step || cmd.index > shown.size()) {
            throw ScriptError(cmd.line, "suggestion " + std::to_string(cmd.index) + " is not shown at this step");
        }
        return shown[cmd.index - 1];
    };

    for (const auto& cmd : commands) {
        try {
            switch (cmd.verb) {
            case Verb::Type: session = wizard.apply(session, Action::type(cmd.text, cmd.advance)); break;
            case Verb::Accept: session = wizard.apply(session, Action::accept(cmd.text, cmd.advance)); break;
            case Verb::Pick: session = wizard.apply(session, Action::accept(shown_item(cmd), cmd.advance)); break;
            case Verb::Edit: {
                const auto& original = shown_item(cmd);
                session = wizard.apply(session,
                                       Action::edit(cmd.text, typed_chars_for_edit(original, cmd.text), cmd.advance));
                break;
            }
            case Verb::Skip: session = wizard.apply(session, Action::skip()); break;
            case Verb::Back: session = wizard.apply(session, Action::back()); break;
            case Verb::Restart: session = wizard.apply(session, Action::restart()); break;
            case Verb::Replace: session = wizard.replace_word(session, cmd.target, cmd.text); break;
            case Verb::Suggest:
            case Verb::More: {
                auto kind = suggestion_kind_for(session.step);
                if (!kind) throw Error(ErrorCode::WrongStep, "the wizard is finished; there is nothing to suggest");
                if (cmd.verb == Verb::Suggest || shown_step != session.step) seen.clear();
                SuggestionQuery query{*kind, default_inputs(*kind, session), std::nullopt, seen};
                SuggestionSet set = service.suggest(query, io.cancel);
                shown = set.items;
                shown_step = session.step;
                seen.insert(seen.end(), set.items.begin(), set.items.end());
                io.out << to_string(*kind) << " suggestions:\n";
                for (std::size_t i = 0; i < set.items.size(); ++i) {
                    io.out << "  " << (i + 1) << ". " << set.items[i] << "\n";
                }
                if (set.exhausted) io.err << "line " << cmd.line << ": only " << set.items.size() << " found\n";
                break;
            }
            }
        } catch (const Error& e) {
            io.err << "line " << cmd.line << ": " << code_name(e.code()) << ": " << e.what() << "\n";
            return exit_code_for(e.code());
        }
    }
    engine.flush_recordings();

    AssembledPrompt prompt;
    try {
        prompt = wizard.assemble(session);
    } catch (const Error& e) {
        io.err << code_name(e.code()) << ": " << api::map_error(e.code()).message << "\n";
        return exit_code_for(e.code());
    }
    io.out << "typed keystrokes: " << prompt.effort.typed_keystrokes << "\n"
           << "pointer actions: " << prompt.effort.pointer_actions << "\n"
           << "prompt characters: " << prompt.effort.prompt_chars << "\n"
           << "keystroke savings: " << std::fixed << std::setprecision(3) << prompt.effort.savings_ratio << "\n"
           << prompt.text << "\n";
    return kOk;
}

// ---- record ---------------------------------------------------------------

struct RecordFlags {
    BackendFlags backend;
    std::string out;
    std::string queries;
};

std::vector<SuggestionQuery> parse_queries(const json& doc, const std::string& path) {
    const json* list = &doc;
    if (doc.is_object() && doc.contains("queries")) list = &doc["queries"];
    if (!list->is_array()) throw UsageError(path + " must hold a list of queries");
    std::vector<SuggestionQuery> out;
    for (const auto& q : *list) {
        try {
            SuggestionQuery query;
            query.kind = parse_kind(q.at("step").get<std::string>());
            if (q.contains("inputs")) query.inputs = q["inputs"].get<std::vector<std::string>>();
            if (q.contains("min_count")) query.min_count = q["min_count"].get<std::size_t>();
            out.push_back(std::move(query));
        } catch (const json::exception& e) {
            throw UsageError(path + ": malformed query " + q.dump() + ": " + e.what());
        }
    }
    return out;
}

int run_record(const RecordFlags& flags, CliEnvironment& io) {
    auto queries = parse_queries(read_json_file(flags.queries), flags.queries);
    EngineConfig cfg = flags.backend.resolve(io.env);
    cfg.mode = BackendMode::Live;
    Engine live = build_engine(cfg);

    if (!live.backend->reachable()) {
        io.err << "backend_unavailable: cannot reach " << cfg.backend_url << "\n";
        return kBackend;
    }
    auto store = std::make_shared<FixtureStore>(true);
    LlmClientOptions client_options;
    client_options.timeout = cfg.timeout;
    auto client = std::make_shared<LlmClient>(std::make_shared<RecordingBackend>(live.backend, store), client_options);
    SuggestionService service(client, live.suggestion);

    for (const auto& query : queries) service.suggest(query, io.cancel);
    store->save(flags.out);
    io.out << "recorded " << store->size() << " entries to " << flags.out << "\n";
    return kOk;
}

// ---- fixtures build -------------------------------------------------------

struct BuildFlags {
    std::string config;
    std::string source;
    std::string out;
};

int run_fixtures_build(const BuildFlags& flags, CliEnvironment& io) {
    std::optional<std::filesystem::path> file;
    if (!flags.config.empty()) file = flags.config;
    EngineConfig cfg = load_config(file, io.env);
    std::vector<Template> templates;
    if (!cfg.template_dir.empty()) templates = load_template_pack(cfg.template_dir);

    json doc = read_json_file(flags.source);
    if (!doc.is_object() || !doc.contains("queries") || !doc["queries"].is_array()) {
        throw UsageError(flags.source + " must hold {\"queries\": [...]}");
    }
    FixtureStore store;
    for (const auto& entry : doc["queries"]) {
        SuggestionQuery query = parse_queries(json::array({entry}), flags.source).front();
        auto prompts = prompts_for(query, templates);
        if (prompts.size() != 1) {
            throw UsageError(flags.source + ": each query must render exactly one prompt (list actions per subject): " +
                             entry.dump());
        }
        const auto& tmpl =
            templates.empty() ? builtin_template(prompts[0].template_id) : find_template(templates, prompts[0].template_id);
        std::vector<std::string> completions;
        try {
            completions = entry.at("completions").get<std::vector<std::string>>();
        } catch (const json::exception& e) {
            throw UsageError(flags.source + ": query needs a list of completions: " + entry.dump());
        }
        for (std::size_t attempt = 0; attempt < completions.size(); ++attempt) {
            auto tag = std::to_string(attempt);
            if (store.find(prompts[0].text, tag)) {
                throw UsageError(flags.source + ": duplicate query " + entry.dump());
            }
            std::string completion = completions[attempt];
            truncate_at_stop(completion, tmpl.stop_sequences);
            store.put(prompts[0].text, tag, std::move(completion));
        }
    }
    store.save(flags.out);
    io.out << "wrote " << store.size() << " entries to " << flags.out << "\n";
    return kOk;
}

// ---- serve ----------------------------------------------------------------

struct ServeFlags {
    BackendFlags backend;
    std::string host;
    int port = -1;
    std::string sessions;
    bool dev = false;
};

int run_serve(const ServeFlags& flags, CliEnvironment& io) {
    EngineConfig cfg = flags.backend.resolve(io.env);
    if (!flags.host.empty()) cfg.listen_host = flags.host;
    if (flags.port >= 0) cfg.listen_port = flags.port;
    if (!flags.sessions.empty()) cfg.session_dir = flags.sessions;
    Engine engine = build_engine(cfg);

    std::shared_ptr<SessionStore> store;
    if (!cfg.session_dir.empty()) store = std::make_shared<SessionStore>(cfg.session_dir);
    api::ApiOptions options;
    options.production = !flags.dev;
    options.cors_origin = cfg.cors_origin;
    api::ApiService service(engine, store, Wizard(), options);

    int port = service.start(cfg.listen_host, cfg.listen_port);
    io.out << "listening on http://" << cfg.listen_host << ":" << port << std::endl;

    std::mutex m;
    std::condition_variable_any cv;
    std::unique_lock lock(m);
    cv.wait(lock, io.cancel, [] { return false; });

    service.stop();
    engine.flush_recordings();
    return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, CliEnvironment io) {
    CLI::App app{"Builds text-to-image prompts step by step from model suggestions.", "promptassist"};
    app.require_subcommand(1);

    SuggestFlags suggest;
    auto* suggest_cmd = app.add_subcommand("suggest", "Print suggestions for one wizard step, one per line");
    suggest.backend.add_to(*suggest_cmd);
    suggest_cmd->add_option("--step", suggest.step, "environment|subjects|actions|scene|style|synonyms")->required();
    suggest_cmd->add_option("--input", suggest.inputs, "Query input (repeatable)");
    suggest_cmd->add_option("--count", suggest.count, "Minimum number of suggestions")->check(CLI::PositiveNumber);
    suggest_cmd->add_option("--exclude-file", suggest.exclude_file, "Suggestions to leave out, one per line");
    suggest_cmd->add_flag("--json", suggest.json_output, "Print the suggestion set as JSON");

    WizardFlags wizard;
    auto* wizard_cmd = app.add_subcommand("wizard", "Run a scripted wizard session and print the prompt");
    wizard.backend.add_to(*wizard_cmd);
    wizard_cmd->add_option("--script", wizard.script, "Script file; standard input when absent");

    RecordFlags record;
    auto* record_cmd = app.add_subcommand("record", "Record fixtures from a live backend");
    record.backend.add_to(*record_cmd, false);
    record_cmd->add_option("--out", record.out, "Fixture file to write")->required();
    record_cmd->add_option("--queries", record.queries, "JSON list of {step, inputs} queries")->required();

    BuildFlags build;
    auto* fixtures_cmd = app.add_subcommand("fixtures", "Fixture file utilities");
    fixtures_cmd->require_subcommand(1);
    auto* build_cmd = fixtures_cmd->add_subcommand("build", "Build a fixture file from authored completions");
    build_cmd->add_option("--config", build.config, "JSON config file");
    build_cmd->add_option("--source", build.source, "JSON {queries: [{step, inputs, completions}]}")->required();
    build_cmd->add_option("--out", build.out, "Fixture file to write")->required();

    ServeFlags serve;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
    serve.backend.add_to(*serve_cmd);
    serve_cmd->add_option("--host", serve.host, "Listen address");
    serve_cmd->add_option("--port", serve.port, "Listen port; 0 picks a free one")->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--sessions", serve.sessions, "Directory for session records");
    serve_cmd->add_flag("--dev", serve.dev, "Report missing fixtures instead of a generic backend error");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, io.out, io.err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*suggest_cmd) return run_suggest(suggest, io);
        if (*wizard_cmd) return run_wizard(wizard, io);
        if (*record_cmd) return run_record(record, io);
        if (*build_cmd) return run_fixtures_build(build, io);
        if (*serve_cmd) return run_serve(serve, io);
    } catch (const UsageError& e) {
        io.err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ScriptError& e) {
        io.err << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        io.err << code_name(e.code()) << ": " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        io.err << "internal_error: " << e.what() << "\n";
        return kBackend;
    }
    return kUsage;
}

}  // namespace promptassist::cli
