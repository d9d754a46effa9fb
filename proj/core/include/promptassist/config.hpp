#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "promptassist/fixture_store.hpp"
#include "promptassist/llm_client.hpp"
#include "promptassist/suggestion_service.hpp"

namespace promptassist {

enum class BackendMode { Live, Fixture, Record };

std::string_view to_string(BackendMode mode) noexcept;
std::optional<BackendMode> parse_backend_mode(std::string_view s) noexcept;

/// Settings shared by the HTTP service and the CLI.
///
/// Sources, lowest precedence first: defaults, a JSON config file with the
/// same keys as the fields below, PROMPTASSIST_* environment variables.
/// Command-line flags override all of them.
struct EngineConfig {
    std::string listen_host = "127.0.0.1";
    int listen_port = 8080;
    BackendMode mode = BackendMode::Fixture;
    std::filesystem::path fixture_path;
    std::string backend_url;
    std::string backend_token;
    std::chrono::milliseconds timeout{30'000};
    double temperature = 0.7;
    std::size_t min_count = 10;
    std::size_t scene_min_count = 3;
    int attempt_budget = 3;
    /// Empty keeps sessions in memory only.
    std::filesystem::path session_dir;
    /// Optional template pack replacing the builtin templates.
    std::filesystem::path template_dir;
    std::string cors_origin = "*";
};

using EnvLookup = std::function<std::optional<std::string>(const char* name)>;

/// Reads PROMPTASSIST_CONFIG (if set) or `config_file`, then the environment.
/// Throws Error{InvalidConfig}.
EngineConfig load_config(const std::optional<std::filesystem::path>& config_file = std::nullopt,
                         const EnvLookup& env = {});

/// Applies one JSON object of settings on top of `config`.
void merge_config(EngineConfig& config, std::string_view json_text);

/// Backend, client and suggestion settings built from an EngineConfig.
struct Engine {
    EngineConfig config;
    std::shared_ptr<FixtureStore> fixtures;  // fixture and record modes
    std::shared_ptr<Backend> backend;
    std::shared_ptr<const LlmClient> client;
    SuggestionConfig suggestion;

    /// Record mode: writes the fixture store to config.fixture_path.
    void flush_recordings() const;
};

/// `live_override` replaces the HTTP backend (tests, alternative wire
/// formats). Throws Error{InvalidConfig} or Error{IoError}.
Engine make_engine(const EngineConfig& config, std::shared_ptr<Backend> live_override = nullptr);

}  // namespace promptassist
