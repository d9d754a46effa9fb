#pragma once

#include <chrono>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "promptassist/llm_client.hpp"

namespace promptassist {

/// Maps requests and responses to a completion server's JSON dialect.
class WireFormat {
public:
    virtual ~WireFormat() = default;
    [[nodiscard]] virtual nlohmann::json encode(const GenerationRequest& request) const = 0;
    /// Throws Error{BackendUnavailable} on a malformed response body.
    [[nodiscard]] virtual Completion decode(const nlohmann::json& response) const = 0;
};

/// Request: {"prompt", "max_tokens", "temperature", "stop"}.
/// Response: {"text", "finish_reason"} where finish_reason is optional.
class SimpleCompletionFormat final : public WireFormat {
public:
    [[nodiscard]] nlohmann::json encode(const GenerationRequest& request) const override;
    [[nodiscard]] Completion decode(const nlohmann::json& response) const override;
};

struct HttpBackendOptions {
    std::string base_url = "http://127.0.0.1:8081";
    std::string path = "/v1/completions";
    std::string auth_token;
    std::chrono::milliseconds connect_timeout{5'000};
    std::chrono::milliseconds read_timeout{30'000};
    std::chrono::milliseconds poll_interval{20};
};

/// Plain-HTTP completion backend. A blocked request is torn down (socket
/// shutdown) when the cancellation token fires.
class HttpBackend final : public Backend {
public:
    explicit HttpBackend(HttpBackendOptions options, std::shared_ptr<const WireFormat> format = nullptr);

    Completion generate(const GenerationRequest& request, std::stop_token cancel) override;
    [[nodiscard]] std::string id() const override { return "http:" + options_.base_url; }
    [[nodiscard]] bool reachable() override;

private:
    HttpBackendOptions options_;
    std::shared_ptr<const WireFormat> format_;
};

}  // namespace promptassist
