#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <vector>

#include "promptassist/fixture_store.hpp"
#include "promptassist/llm_client.hpp"
#include "promptassist/suggestion_service.hpp"

namespace promptassist::testing {

/// Answers with a caller-supplied function and counts calls.
class FunctionBackend final : public Backend {
public:
    using Fn = std::function<Completion(const GenerationRequest&, std::stop_token)>;
    explicit FunctionBackend(Fn fn, std::string id = "function") : fn_(std::move(fn)), id_(std::move(id)) {}

    Completion generate(const GenerationRequest& request, std::stop_token cancel) override {
        ++calls;
        return fn_(request, std::move(cancel));
    }
    [[nodiscard]] std::string id() const override { return id_; }

    std::atomic<int> calls{0};

private:
    Fn fn_;
    std::string id_;
};

/// Blocks until cancelled (or `release()`), then answers `text`.
class BlockingBackend final : public Backend {
public:
    explicit BlockingBackend(std::string text = "a, b") : text_(std::move(text)) {}

    Completion generate(const GenerationRequest&, std::stop_token cancel) override {
        ++calls;
        {
            std::lock_guard g(m_);
            started_ = true;
        }
        cv_.notify_all();
        std::unique_lock lock(m_);
        cv_.wait(lock, cancel, [&] { return released_; });
        if (cancel.stop_requested()) {
            ++cancelled;
            return Completion{"", {}, id(), FinishReason::Cancelled, std::nullopt};
        }
        return Completion{text_, {}, id(), FinishReason::StopSequence, std::nullopt};
    }
    [[nodiscard]] std::string id() const override { return "blocking"; }

    /// False when no call arrived within `limit`.
    bool wait_started(std::chrono::milliseconds limit = std::chrono::seconds(5)) {
        std::unique_lock lock(m_);
        return cv_.wait_for(lock, limit, [&] { return started_; });
    }
    void release() {
        {
            std::lock_guard g(m_);
            released_ = true;
        }
        cv_.notify_all();
    }

    std::atomic<int> calls{0};
    std::atomic<int> cancelled{0};

private:
    std::string text_;
    std::mutex m_;
    std::condition_variable_any cv_;
    bool started_ = false;
    bool released_ = false;
};

/// Records `completions[i]` under attempt tag i for the single prompt of
/// `query`.
inline void put_attempts(FixtureStore& store, const SuggestionQuery& query, const std::vector<std::string>& completions) {
    auto prompts = prompts_for(query);
    if (prompts.size() != 1) throw std::invalid_argument("put_attempts needs a single-prompt query");
    for (std::size_t i = 0; i < completions.size(); ++i) store.put(prompts[0].text, std::to_string(i), completions[i]);
}

}  // namespace promptassist::testing
