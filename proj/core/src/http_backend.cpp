#include "promptassist/http_backend.hpp"

#include <condition_variable>
#include <mutex>
#include <thread>

#include "httplib.h"

namespace promptassist {

namespace {

void apply_timeouts(httplib::Client& client, std::chrono::milliseconds connect,
                    std::chrono::milliseconds read) {
    auto split = [](std::chrono::milliseconds ms) {
        return std::pair<time_t, time_t>(static_cast<time_t>(ms.count() / 1000),
                                         static_cast<time_t>((ms.count() % 1000) * 1000));
    };
    auto [cs, cus] = split(connect);
    auto [rs, rus] = split(read);
    client.set_connection_timeout(cs, cus);
    client.set_read_timeout(rs, rus);
    client.set_write_timeout(rs, rus);
}

}  // namespace

nlohmann::json SimpleCompletionFormat::encode(const GenerationRequest& request) const {
    return {{"prompt", request.prompt_text},
            {"max_tokens", request.max_tokens},
            {"temperature", request.temperature},
            {"stop", request.stop_sequences}};
}

Completion SimpleCompletionFormat::decode(const nlohmann::json& response) const {
    if (!response.is_object() || !response.contains("text") || !response["text"].is_string()) {
        throw Error(ErrorCode::BackendUnavailable, "completion response has no \"text\" string");
    }
    Completion c;
    c.text = response["text"].get<std::string>();
    c.finish_reason = FinishReason::StopSequence;
    if (auto it = response.find("finish_reason"); it != response.end() && it->is_string()) {
        if (auto parsed = parse_finish_reason(it->get<std::string>())) c.finish_reason = *parsed;
    }
    return c;
}

HttpBackend::HttpBackend(HttpBackendOptions options, std::shared_ptr<const WireFormat> format)
    : options_(std::move(options)), format_(std::move(format)) {
    if (!format_) format_ = std::make_shared<SimpleCompletionFormat>();
    if (options_.base_url.empty()) throw Error(ErrorCode::InvalidConfig, "backend URL is empty");
    if (options_.poll_interval <= std::chrono::milliseconds::zero()) {
        throw Error(ErrorCode::InvalidConfig, "poll interval must be positive");
    }
}

Completion HttpBackend::generate(const GenerationRequest& request, std::stop_token cancel) {
    Completion out;
    out.backend_id = id();
    if (cancel.stop_requested()) {
        out.finish_reason = FinishReason::Cancelled;
        return out;
    }

    httplib::Client client(options_.base_url);
    if (!client.is_valid()) throw Error(ErrorCode::InvalidConfig, "unsupported backend URL " + options_.base_url);
    apply_timeouts(client, options_.connect_timeout, options_.read_timeout);
    if (!options_.auth_token.empty()) client.set_bearer_token_auth(options_.auth_token);

    const std::string body = format_->encode(request).dump();
    std::mutex m;
    std::condition_variable cv;
    bool done = false;
    httplib::Result result{nullptr, httplib::Error::Unknown};

    std::thread worker([&] {
        auto r = client.Post(options_.path, body, "application/json");
        std::lock_guard lock(m);
        result = std::move(r);
        done = true;
        cv.notify_one();
    });

    bool cancelled = false;
    {
        std::unique_lock lock(m);
        while (!cv.wait_for(lock, options_.poll_interval, [&] { return done; })) {
            if (cancel.stop_requested()) {
                cancelled = true;
                lock.unlock();
                client.stop();
                lock.lock();
                cv.wait(lock, [&] { return done; });
                break;
            }
        }
    }
    worker.join();

    if (cancelled || cancel.stop_requested()) {
        out.finish_reason = FinishReason::Cancelled;
        return out;
    }
    if (!result) {
        throw Error(ErrorCode::BackendUnavailable,
                    "completion backend request failed: " + httplib::to_string(result.error()));
    }
    if (result->status != 200) {
        throw Error(ErrorCode::BackendUnavailable,
                    "completion backend answered HTTP " + std::to_string(result->status));
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::BackendUnavailable, "completion backend returned invalid JSON");
    }
    Completion decoded = format_->decode(doc);
    decoded.backend_id = id();
    return decoded;
}

bool HttpBackend::reachable() {
    httplib::Client client(options_.base_url);
    if (!client.is_valid()) return false;
    auto probe = std::min(options_.connect_timeout, std::chrono::milliseconds(2'000));
    apply_timeouts(client, probe, probe);
    // Any HTTP answer, even 404, proves the server is up.
    return static_cast<bool>(client.Get("/"));
}

}  // namespace promptassist
