#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "promptassist/error.hpp"

namespace promptassist {

struct GenerationRequest {
    std::string prompt_text;
    int max_tokens = 64;
    double temperature = 0.7;
    std::vector<std::string> stop_sequences;
    /// Varies across regeneration attempts so replayed fixtures can differ for
    /// the same prompt.
    std::string attempt_tag = "0";
};

/// Throws Error{InvalidRequest}.
void validate(const GenerationRequest& request);

enum class FinishReason { StopSequence, Length, Cancelled, Error };

std::string_view to_string(FinishReason reason) noexcept;
std::optional<FinishReason> parse_finish_reason(std::string_view s) noexcept;

struct Completion {
    std::string text;
    std::chrono::milliseconds latency{0};
    std::string backend_id;
    FinishReason finish_reason = FinishReason::StopSequence;
    /// Set when finish_reason is Error (currently only Timeout).
    std::optional<ErrorCode> error;
};

/// A source of completions. Implementations must return (or throw) within
/// one poll interval of `cancel` being requested.
class Backend {
public:
    virtual ~Backend() = default;
    virtual Completion generate(const GenerationRequest& request, std::stop_token cancel) = 0;
    [[nodiscard]] virtual std::string id() const = 0;
    /// Cheap liveness probe for health checks.
    [[nodiscard]] virtual bool reachable() { return true; }
};

/// Cuts `text` at the earliest occurrence of any stop sequence. Returns true
/// when a cut happened.
bool truncate_at_stop(std::string& text, const std::vector<std::string>& stops);

/// Hex SHA-256 of the prompt after CRLF->LF and per-line trailing whitespace
/// removal.
std::string normalize_digest(std::string_view prompt_text);

struct LlmClientOptions {
    std::chrono::milliseconds timeout{30'000};
    std::chrono::milliseconds poll_interval{20};
};

/// Runs backend calls on a worker thread so that cancellation and the timeout
/// are observed even when the backend is slow.
///
/// Cancellation returns finish_reason=Cancelled with empty text (a request
/// cancelled before the call never reaches the backend). Timeout returns
/// finish_reason=Error with error=Timeout. Backend failures propagate as
/// Error (BackendUnavailable, MissingFixture, ...).
class LlmClient {
public:
    explicit LlmClient(std::shared_ptr<Backend> backend, LlmClientOptions options = {});

    Completion generate(const GenerationRequest& request, std::stop_token cancel = {}) const;

    [[nodiscard]] Backend& backend() const { return *backend_; }
    [[nodiscard]] const LlmClientOptions& options() const { return options_; }

private:
    std::shared_ptr<Backend> backend_;
    LlmClientOptions options_;
};

}  // namespace promptassist
