#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "promptassist/llm_client.hpp"

namespace promptassist {

/// Recorded completions keyed by "<normalize_digest(prompt)>:<attempt_tag>".
/// On disk this is a flat JSON object of key -> completion text.
/// Reads may run concurrently; writes are serialized.
class FixtureStore {
public:
    FixtureStore() = default;
    explicit FixtureStore(bool recording) : recording_(recording) {}

    FixtureStore(const FixtureStore&) = delete;
    FixtureStore& operator=(const FixtureStore&) = delete;

    static std::string key(std::string_view prompt_text, std::string_view attempt_tag);

    /// Replaces the current entries with the file's. Throws Error{IoError} or
    /// Error{CorruptRecord}.
    void load(const std::filesystem::path& path);
    /// Sorted keys, two-space indent, LF newlines, written atomically.
    void save(const std::filesystem::path& path) const;
    [[nodiscard]] std::string to_json_text() const;

    [[nodiscard]] std::optional<std::string> find(std::string_view prompt_text,
                                                  std::string_view attempt_tag) const;
    /// Throws Error{MissingFixture} for unrecorded keys.
    [[nodiscard]] std::string lookup(std::string_view prompt_text, std::string_view attempt_tag) const;

    void put(std::string_view prompt_text, std::string_view attempt_tag, std::string completion);
    void put_key(std::string key, std::string completion);

    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::map<std::string, std::string> entries() const;

    [[nodiscard]] bool recording() const;
    void set_recording(bool on);

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::string> entries_;
    bool recording_ = false;
};

struct FixtureBackendOptions {
    /// Artificial delay before answering; cancellation interrupts it.
    std::chrono::milliseconds simulated_latency{0};
};

/// Replays completions from a FixtureStore.
class FixtureBackend final : public Backend {
public:
    explicit FixtureBackend(std::shared_ptr<const FixtureStore> store, FixtureBackendOptions options = {});

    Completion generate(const GenerationRequest& request, std::stop_token cancel) override;
    [[nodiscard]] std::string id() const override { return "fixture"; }

private:
    std::shared_ptr<const FixtureStore> store_;
    FixtureBackendOptions options_;
};

/// Forwards to `live` and stores (digest, attempt_tag) -> text. The stored
/// text is already cut at the request's stop sequences. Throws
/// Error{RecordingDisabled} unless the store is in recording mode.
Completion record(const GenerationRequest& request, Backend& live, FixtureStore& store,
                  std::stop_token cancel = {});

/// A Backend that records every successful generation.
class RecordingBackend final : public Backend {
public:
    RecordingBackend(std::shared_ptr<Backend> live, std::shared_ptr<FixtureStore> store);

    Completion generate(const GenerationRequest& request, std::stop_token cancel) override;
    [[nodiscard]] std::string id() const override;
    [[nodiscard]] bool reachable() override { return live_->reachable(); }

private:
    std::shared_ptr<Backend> live_;
    std::shared_ptr<FixtureStore> store_;
};

}  // namespace promptassist
