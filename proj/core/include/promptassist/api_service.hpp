#pragma once

#include <chrono>
#include <exception>
#include <memory>
#include <stop_token>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "promptassist/config.hpp"
#include "promptassist/error.hpp"
#include "promptassist/persistence.hpp"
#include "promptassist/wizard.hpp"

namespace promptassist::api {

/// What clients see when something fails. `message` is a complete sentence
/// meant for end users.
struct ApiError {
    std::string code;
    std::string message;
    bool retriable = false;
    int http_status = 500;
};

/// Total over ErrorCode. In production a missing fixture is reported as
/// backend_unavailable; otherwise as missing_fixture.
ApiError map_error(ErrorCode code, bool production = true);
/// Error -> map_error; anything else -> internal_error.
ApiError map_exception(std::exception_ptr error, bool production = true);

nlohmann::json to_json(const ApiError& error);

struct ApiOptions {
    bool production = true;
    std::string cors_origin = "*";
    /// How often an in-flight suggest request checks for client disconnect.
    std::chrono::milliseconds disconnect_poll{20};
};

struct Response {
    int status = 200;
    nlohmann::json body;
};

/// The wizard and suggestion engine over HTTP+JSON.
///
///   POST /sessions                      -> 201 session
///   GET  /sessions                      -> {"sessions": [summary...]}
///   GET  /sessions/{id}                 -> session
///   POST /sessions/{id}/suggest         -> suggestion set
///   POST /sessions/{id}/action          -> session
///   GET  /sessions/{id}/prompt          -> assembled prompt with effort
///   GET  /healthz                       -> backend status
///
/// Errors answer {"error": ApiError}; an exhausted suggest answers 422 with
/// the partial set under "suggestions".
class ApiService {
public:
    /// `store` may be null to keep sessions in memory only. Prompt assembly
    /// follows wizard.options().assembly.
    ApiService(Engine engine, std::shared_ptr<SessionStore> store, Wizard wizard = Wizard(),
               ApiOptions options = {});
    ~ApiService();

    ApiService(const ApiService&) = delete;
    ApiService& operator=(const ApiService&) = delete;

    /// Routes one request without any networking. `cancel` aborts a suggest
    /// in flight.
    Response handle(std::string_view method, std::string_view path, std::string_view body,
                    std::stop_token cancel = {});

    /// Binds (port 0 picks a free port) and serves on a background thread.
    /// Returns the bound port. Throws Error{IoError}.
    int start(const std::string& host, int port);
    /// Binds and serves on the calling thread until stop().
    void run(const std::string& host, int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace promptassist::api
