#include "promptassist/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "promptassist/error.hpp"
#include "promptassist/http_backend.hpp"
#include "promptassist/templates.hpp"

namespace promptassist {

std::string_view to_string(BackendMode mode) noexcept {
    switch (mode) {
    case BackendMode::Live: return "live";
    case BackendMode::Fixture: return "fixture";
    case BackendMode::Record: return "record";
    }
    return "fixture";
}

std::optional<BackendMode> parse_backend_mode(std::string_view s) noexcept {
    for (auto m : {BackendMode::Live, BackendMode::Fixture, BackendMode::Record}) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

long long to_integer(std::string_view key, const std::string& value) {
    try {
        std::size_t used = 0;
        auto v = std::stoll(value, &used);
        if (used != value.size()) invalid(std::string(key) + ": not an integer: " + value);
        return v;
    } catch (const std::logic_error&) {
        invalid(std::string(key) + ": not an integer: " + value);
    }
}

double to_double(std::string_view key, const std::string& value) {
    try {
        std::size_t used = 0;
        auto v = std::stod(value, &used);
        if (used != value.size()) invalid(std::string(key) + ": not a number: " + value);
        return v;
    } catch (const std::logic_error&) {
        invalid(std::string(key) + ": not a number: " + value);
    }
}

std::size_t to_count(std::string_view key, long long v) {
    if (v < 1) invalid(std::string(key) + " must be at least 1");
    return static_cast<std::size_t>(v);
}

// One setting by name; values arrive as strings from both sources.
void set_field(EngineConfig& c, std::string_view key, const std::string& value) {
    if (key == "listen_host") {
        c.listen_host = value;
    } else if (key == "listen_port") {
        auto port = to_integer(key, value);
        if (port < 0 || port > 65535) invalid("listen_port out of range");
        c.listen_port = static_cast<int>(port);
    } else if (key == "mode") {
        auto mode = parse_backend_mode(value);
        if (!mode) invalid("mode must be live, fixture or record");
        c.mode = *mode;
    } else if (key == "fixture_path") {
        c.fixture_path = value;
    } else if (key == "backend_url") {
        c.backend_url = value;
    } else if (key == "backend_token") {
        c.backend_token = value;
    } else if (key == "timeout_ms") {
        c.timeout = std::chrono::milliseconds(to_count(key, to_integer(key, value)));
    } else if (key == "temperature") {
        c.temperature = to_double(key, value);
        if (!(c.temperature >= 0.0 && c.temperature <= 2.0)) invalid("temperature must lie in [0, 2]");
    } else if (key == "min_count") {
        c.min_count = to_count(key, to_integer(key, value));
    } else if (key == "scene_min_count") {
        c.scene_min_count = to_count(key, to_integer(key, value));
    } else if (key == "attempt_budget") {
        c.attempt_budget = static_cast<int>(to_count(key, to_integer(key, value)));
    } else if (key == "session_dir") {
        c.session_dir = value;
    } else if (key == "template_dir") {
        c.template_dir = value;
    } else if (key == "cors_origin") {
        c.cors_origin = value;
    } else {
        invalid("unknown setting \"" + std::string(key) + "\"");
    }
}

constexpr std::string_view kKeys[] = {"listen_host",  "listen_port",  "mode",          "fixture_path",
                                      "backend_url",  "backend_token", "timeout_ms",   "temperature",
                                      "min_count",    "scene_min_count", "attempt_budget", "session_dir",
                                      "template_dir", "cors_origin"};

std::string env_name(std::string_view key) {
    std::string name = "PROMPTASSIST_";
    for (char c : key) name.push_back(static_cast<char>(c >= 'a' && c <= 'z' ? c - 'a' + 'A' : c));
    return name;
}

}  // namespace

void merge_config(EngineConfig& config, std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        invalid(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) invalid("config file must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
        set_field(config, key, value.is_string() ? value.get<std::string>() : value.dump());
    }
}

EngineConfig load_config(const std::optional<std::filesystem::path>& config_file, const EnvLookup& env_in) {
    EnvLookup env = env_in ? env_in : [](const char* name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name)) return std::string(v);
        return std::nullopt;
    };

    EngineConfig config;
    std::optional<std::filesystem::path> file = config_file;
    if (!file) {
        if (auto from_env = env("PROMPTASSIST_CONFIG")) file = *from_env;
    }
    if (file) {
        std::ifstream in(*file, std::ios::binary);
        if (!in) invalid("cannot read config file " + file->string());
        std::ostringstream ss;
        ss << in.rdbuf();
        merge_config(config, ss.str());
    }
    for (auto key : kKeys) {
        if (auto v = env(env_name(key).c_str())) set_field(config, key, *v);
    }
    return config;
}

void Engine::flush_recordings() const {
    if (config.mode == BackendMode::Record && fixtures) fixtures->save(config.fixture_path);
}

Engine make_engine(const EngineConfig& config, std::shared_ptr<Backend> live_override) {
    Engine engine;
    engine.config = config;

    auto live = [&]() -> std::shared_ptr<Backend> {
        if (live_override) return live_override;
        if (config.backend_url.empty()) invalid("live and record modes need a backend URL");
        HttpBackendOptions opts;
        opts.base_url = config.backend_url;
        opts.auth_token = config.backend_token;
        opts.read_timeout = config.timeout;
        return std::make_shared<HttpBackend>(opts);
    };

    switch (config.mode) {
    case BackendMode::Live: engine.backend = live(); break;
    case BackendMode::Fixture:
        if (config.fixture_path.empty()) invalid("fixture mode needs a fixture file");
        engine.fixtures = std::make_shared<FixtureStore>();
        engine.fixtures->load(config.fixture_path);
        engine.backend = std::make_shared<FixtureBackend>(engine.fixtures);
        break;
    case BackendMode::Record:
        if (config.fixture_path.empty()) invalid("record mode needs an output fixture file");
        engine.fixtures = std::make_shared<FixtureStore>(true);
        if (std::filesystem::exists(config.fixture_path)) engine.fixtures->load(config.fixture_path);
        engine.backend = std::make_shared<RecordingBackend>(live(), engine.fixtures);
        break;
    }

    LlmClientOptions client_opts;
    client_opts.timeout = config.timeout;
    engine.client = std::make_shared<LlmClient>(engine.backend, client_opts);

    engine.suggestion.attempt_budget = config.attempt_budget;
    engine.suggestion.default_min_count = config.min_count;
    engine.suggestion.scene_min_count = config.scene_min_count;
    engine.suggestion.temperature = config.temperature;
    if (!config.template_dir.empty()) engine.suggestion.templates = load_template_pack(config.template_dir);
    return engine;
}

}  // namespace promptassist
