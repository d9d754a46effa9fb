#include "promptassist/fixture_store.hpp"

#include <condition_variable>
#include <fstream>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "atomic_file.hpp"

namespace promptassist {

std::string FixtureStore::key(std::string_view prompt_text, std::string_view attempt_tag) {
    std::string k = normalize_digest(prompt_text);
    k.push_back(':');
    k.append(attempt_tag);
    return k;
}

void FixtureStore::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read fixture file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();

    std::map<std::string, std::string> parsed;
    try {
        auto doc = nlohmann::json::parse(ss.str());
        if (!doc.is_object()) throw Error(ErrorCode::CorruptRecord, "fixture file must hold a JSON object");
        for (const auto& [k, v] : doc.items()) {
            if (!v.is_string()) {
                throw Error(ErrorCode::CorruptRecord, "fixture entry " + k + " is not a string");
            }
            parsed.emplace(k, v.get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::CorruptRecord, "fixture file " + path.string() + ": " + e.what());
    }
    std::unique_lock lock(mutex_);
    entries_ = std::move(parsed);
}

std::string FixtureStore::to_json_text() const {
    nlohmann::json doc = nlohmann::json::object();
    {
        std::shared_lock lock(mutex_);
        for (const auto& [k, v] : entries_) doc[k] = v;
    }
    return doc.dump(2) + "\n";
}

void FixtureStore::save(const std::filesystem::path& path) const {
    detail::write_file_atomically(path, to_json_text());
}

std::optional<std::string> FixtureStore::find(std::string_view prompt_text,
                                              std::string_view attempt_tag) const {
    auto k = key(prompt_text, attempt_tag);
    std::shared_lock lock(mutex_);
    auto it = entries_.find(k);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::string FixtureStore::lookup(std::string_view prompt_text, std::string_view attempt_tag) const {
    if (auto hit = find(prompt_text, attempt_tag)) return *std::move(hit);
    throw Error(ErrorCode::MissingFixture,
                "no fixture recorded for " + key(prompt_text, attempt_tag));
}

void FixtureStore::put(std::string_view prompt_text, std::string_view attempt_tag, std::string completion) {
    put_key(key(prompt_text, attempt_tag), std::move(completion));
}

void FixtureStore::put_key(std::string key, std::string completion) {
    std::unique_lock lock(mutex_);
    entries_[std::move(key)] = std::move(completion);
}

std::size_t FixtureStore::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

std::map<std::string, std::string> FixtureStore::entries() const {
    std::shared_lock lock(mutex_);
    return entries_;
}

bool FixtureStore::recording() const {
    std::shared_lock lock(mutex_);
    return recording_;
}

void FixtureStore::set_recording(bool on) {
    std::unique_lock lock(mutex_);
    recording_ = on;
}

FixtureBackend::FixtureBackend(std::shared_ptr<const FixtureStore> store, FixtureBackendOptions options)
    : store_(std::move(store)), options_(options) {
    if (!store_) throw Error(ErrorCode::InvalidConfig, "fixture backend needs a store");
}

Completion FixtureBackend::generate(const GenerationRequest& request, std::stop_token cancel) {
    Completion c;
    c.backend_id = id();
    if (options_.simulated_latency.count() > 0) {
        std::mutex m;
        std::condition_variable_any cv;
        std::unique_lock lock(m);
        cv.wait_for(lock, cancel, options_.simulated_latency, [] { return false; });
    }
    if (cancel.stop_requested()) {
        c.finish_reason = FinishReason::Cancelled;
        return c;
    }
    c.text = store_->lookup(request.prompt_text, request.attempt_tag);
    c.finish_reason = FinishReason::StopSequence;
    return c;
}

Completion record(const GenerationRequest& request, Backend& live, FixtureStore& store, std::stop_token cancel) {
    if (!store.recording()) throw Error(ErrorCode::RecordingDisabled, "fixture store is not in recording mode");
    validate(request);
    Completion c = live.generate(request, cancel);
    if (c.finish_reason == FinishReason::Cancelled || c.finish_reason == FinishReason::Error) return c;
    if (truncate_at_stop(c.text, request.stop_sequences)) c.finish_reason = FinishReason::StopSequence;
    store.put(request.prompt_text, request.attempt_tag, c.text);
    return c;
}

RecordingBackend::RecordingBackend(std::shared_ptr<Backend> live, std::shared_ptr<FixtureStore> store)
    : live_(std::move(live)), store_(std::move(store)) {
    if (!live_ || !store_) throw Error(ErrorCode::InvalidConfig, "recording backend needs a live backend and a store");
}

Completion RecordingBackend::generate(const GenerationRequest& request, std::stop_token cancel) {
    return record(request, *live_, *store_, cancel);
}

std::string RecordingBackend::id() const { return "record:" + live_->id(); }

}  // namespace promptassist
