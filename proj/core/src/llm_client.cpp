#include "promptassist/llm_client.hpp"

#include <openssl/evp.h>

#include <future>

#include "promptassist/text.hpp"

namespace promptassist {

void validate(const GenerationRequest& request) {
    if (request.prompt_text.empty()) throw Error(ErrorCode::InvalidRequest, "prompt text is empty");
    if (request.max_tokens < 1) throw Error(ErrorCode::InvalidRequest, "max_tokens must be at least 1");
    if (!(request.temperature >= 0.0 && request.temperature <= 2.0)) {
        throw Error(ErrorCode::InvalidRequest, "temperature must lie in [0, 2]");
    }
    for (const auto& stop : request.stop_sequences) {
        if (stop.empty()) throw Error(ErrorCode::InvalidRequest, "empty stop sequence");
    }
}

std::string_view to_string(FinishReason reason) noexcept {
    switch (reason) {
    case FinishReason::StopSequence: return "stop_sequence";
    case FinishReason::Length: return "length";
    case FinishReason::Cancelled: return "cancelled";
    case FinishReason::Error: return "error";
    }
    return "error";
}

std::optional<FinishReason> parse_finish_reason(std::string_view s) noexcept {
    for (auto r : {FinishReason::StopSequence, FinishReason::Length, FinishReason::Cancelled,
                   FinishReason::Error}) {
        if (to_string(r) == s) return r;
    }
    // Common spellings from other completion servers.
    if (s == "stop") return FinishReason::StopSequence;
    return std::nullopt;
}

bool truncate_at_stop(std::string& text, const std::vector<std::string>& stops) {
    auto earliest = std::string::npos;
    for (const auto& stop : stops) {
        if (stop.empty()) continue;
        auto pos = text.find(stop);
        if (pos < earliest) earliest = pos;
    }
    if (earliest == std::string::npos) return false;
    text.resize(earliest);
    return true;
}

std::string normalize_digest(std::string_view prompt_text) {
    std::string normalized;
    normalized.reserve(prompt_text.size());
    bool first = true;
    for (auto line : text::split_lines(prompt_text)) {
        if (!first) normalized.push_back('\n');
        first = false;
        normalized.append(text::trim_right(line));
    }

    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(normalized.data(), normalized.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::IoError, "SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        hex.push_back(kHex[digest[i] >> 4]);
        hex.push_back(kHex[digest[i] & 0x0F]);
    }
    return hex;
}

LlmClient::LlmClient(std::shared_ptr<Backend> backend, LlmClientOptions options)
    : backend_(std::move(backend)), options_(options) {
    if (!backend_) throw Error(ErrorCode::InvalidConfig, "LlmClient needs a backend");
    if (options_.poll_interval <= std::chrono::milliseconds::zero()) {
        throw Error(ErrorCode::InvalidConfig, "poll interval must be positive");
    }
}

Completion LlmClient::generate(const GenerationRequest& request, std::stop_token cancel) const {
    validate(request);

    using clock = std::chrono::steady_clock;
    const auto started = clock::now();
    auto finished = [&](FinishReason reason, std::optional<ErrorCode> error = std::nullopt) {
        Completion c;
        c.backend_id = backend_->id();
        c.finish_reason = reason;
        c.error = error;
        c.latency = std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - started);
        return c;
    };

    if (cancel.stop_requested()) return finished(FinishReason::Cancelled);

    std::stop_source inner;
    std::stop_callback forward(cancel, [&inner] { inner.request_stop(); });

    auto task = std::async(std::launch::async, [backend = backend_, request, token = inner.get_token()] {
        return backend->generate(request, token);
    });

    const auto deadline = options_.timeout.count() > 0 ? started + options_.timeout : clock::time_point::max();
    auto abandon = [&] {
        inner.request_stop();
        task.wait();
        try {
            (void)task.get();
        } catch (...) {
            // The caller gave up on this request; its outcome is discarded.
        }
    };

    while (task.wait_for(options_.poll_interval) != std::future_status::ready) {
        if (cancel.stop_requested()) {
            abandon();
            return finished(FinishReason::Cancelled);
        }
        if (clock::now() >= deadline) {
            abandon();
            return finished(FinishReason::Error, ErrorCode::Timeout);
        }
    }

    Completion result = task.get();
    if (cancel.stop_requested() || result.finish_reason == FinishReason::Cancelled) {
        return finished(FinishReason::Cancelled);
    }

    if (truncate_at_stop(result.text, request.stop_sequences)) {
        result.finish_reason = FinishReason::StopSequence;
    }
    if (result.backend_id.empty()) result.backend_id = backend_->id();
    result.latency = std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - started);
    return result;
}

}  // namespace promptassist
