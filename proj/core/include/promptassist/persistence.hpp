#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "promptassist/wizard.hpp"

namespace promptassist {

inline constexpr int kSessionSchemaVersion = 1;

struct SessionSummary {
    std::string id;
    Timestamp updated = 0;
    /// The assembled prompt, or "" while the session has no scene.
    std::string preview;
};

/// A directory of <id>.json session records. The event log is authoritative;
/// the stored snapshot is checked against a replay on load.
class SessionStore {
public:
    explicit SessionStore(std::filesystem::path dir);

    /// Atomic write-then-rename. Throws StorageFull or SerializationFailure.
    std::filesystem::path save(const Session& session, const std::map<std::string, std::string>& metadata = {});

    /// Throws NotFound, SchemaMismatch or CorruptRecord.
    [[nodiscard]] Session load(std::string_view id) const;

    /// Newest first.
    [[nodiscard]] std::vector<SessionSummary> list_sessions() const;

    [[nodiscard]] std::filesystem::path path_for(std::string_view id) const;
    [[nodiscard]] const std::filesystem::path& directory() const noexcept { return dir_; }

    /// Serialized record text, exactly as save() writes it.
    [[nodiscard]] static std::string serialize(const Session& session,
                                               const std::map<std::string, std::string>& metadata = {});
    /// Throws SchemaMismatch or CorruptRecord.
    [[nodiscard]] static Session deserialize(std::string_view record_text);

    /// Runs between writing the temp file and renaming it; throwing from it
    /// simulates a crash mid-save.
    void set_before_rename_hook(std::function<void()> hook) { before_rename_ = std::move(hook); }

private:
    std::mutex& lock_for(const std::string& id);

    std::filesystem::path dir_;
    std::function<void()> before_rename_;
    std::mutex locks_mutex_;
    std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

/// Ids are [A-Za-z0-9_-]{1,64}; anything else cannot name a record.
bool is_valid_session_id(std::string_view id) noexcept;

}  // namespace promptassist
