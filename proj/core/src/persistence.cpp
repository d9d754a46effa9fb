#include "promptassist/persistence.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "atomic_file.hpp"
#include "promptassist/error.hpp"
#include "promptassist/json_io.hpp"

namespace promptassist {

namespace {

std::optional<std::string> read_whole(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

bool is_valid_session_id(std::string_view id) noexcept {
    if (id.empty() || id.size() > 64) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '-' || c == '_';
    });
}

SessionStore::SessionStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create session directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path SessionStore::path_for(std::string_view id) const {
    return dir_ / (std::string(id) + ".json");
}

std::mutex& SessionStore::lock_for(const std::string& id) {
    std::lock_guard guard(locks_mutex_);
    auto& slot = locks_[id];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

std::string SessionStore::serialize(const Session& session, const std::map<std::string, std::string>& metadata) {
    if (!is_valid_session_id(session.id)) {
        throw Error(ErrorCode::SerializationFailure, "session id \"" + session.id + "\" is not storable");
    }
    // Refuse to persist a snapshot that its own log would not reproduce.
    Session replayed;
    try {
        replayed = Wizard().replay(session.id, session.created, session.events);
    } catch (const Error& e) {
        throw Error(ErrorCode::SerializationFailure, std::string("session is not consistent: ") + e.what());
    }
    if (!same_state(replayed, session)) {
        throw Error(ErrorCode::SerializationFailure, "session state does not match its event log");
    }

    auto events = nlohmann::json::array();
    for (const auto& e : session.events) events.push_back(json_io::to_json(e));
    nlohmann::json record{{"schema_version", kSessionSchemaVersion},
                          {"id", session.id},
                          {"created_at_ms", session.created},
                          {"updated_at_ms", session.updated},
                          {"snapshot", json_io::state_to_json(session)},
                          {"events", std::move(events)},
                          {"metadata", metadata}};
    try {
        return record.dump(2) + "\n";
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SerializationFailure, std::string("cannot encode session: ") + e.what());
    }
}

Session SessionStore::deserialize(std::string_view record_text) {
    nlohmann::json record;
    try {
        record = nlohmann::json::parse(record_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::CorruptRecord, std::string("session record is not valid JSON: ") + e.what());
    }
    if (!record.is_object() || !record.contains("schema_version") || !record["schema_version"].is_number_integer()) {
        throw Error(ErrorCode::CorruptRecord, "session record has no schema version");
    }
    if (record["schema_version"].get<int>() != kSessionSchemaVersion) {
        throw Error(ErrorCode::SchemaMismatch,
                    "session record has schema version " + record["schema_version"].dump() + ", expected " +
                        std::to_string(kSessionSchemaVersion));
    }
    try {
        auto id = record.at("id").get<std::string>();
        auto created = record.at("created_at_ms").get<Timestamp>();
        std::vector<InteractionEvent> events;
        for (const auto& ej : record.at("events")) events.push_back(json_io::event_from_json(ej));

        Session session = Wizard().replay(id, created, events);
        if (json_io::state_to_json(session) != record.at("snapshot")) {
            throw Error(ErrorCode::CorruptRecord, "session snapshot disagrees with its event log");
        }
        session.updated = record.at("updated_at_ms").get<Timestamp>();
        return session;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::CorruptRecord, std::string("malformed session record: ") + e.what());
    }
}

std::filesystem::path SessionStore::save(const Session& session, const std::map<std::string, std::string>& metadata) {
    auto text = serialize(session, metadata);
    auto path = path_for(session.id);
    std::lock_guard guard(lock_for(session.id));
    try {
        detail::write_file_atomically(path, text, before_rename_);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::StorageFull) throw;
        throw Error(ErrorCode::SerializationFailure, e.what());
    }
    return path;
}

Session SessionStore::load(std::string_view id) const {
    if (!is_valid_session_id(id)) throw Error(ErrorCode::NotFound, "no session " + std::string(id));
    auto text = read_whole(path_for(id));
    if (!text) throw Error(ErrorCode::NotFound, "no session " + std::string(id));
    Session s = deserialize(*text);
    if (s.id != id) throw Error(ErrorCode::CorruptRecord, "session file holds a different id");
    return s;
}

std::vector<SessionSummary> SessionStore::list_sessions() const {
    std::vector<SessionSummary> out;
    std::error_code ec;
    for (std::filesystem::directory_iterator it(dir_, ec), end; !ec && it != end; it.increment(ec)) {
        const auto& path = it->path();
        if (path.extension() != ".json") continue;
        auto id = path.stem().string();
        if (!is_valid_session_id(id)) continue;
        try {
            auto s = load(id);
            out.push_back({s.id, s.updated, compose_prompt(s).value_or("")});
        } catch (const Error&) {
            // Half-written or foreign files are skipped; listing is best effort.
        }
    }
    std::sort(out.begin(), out.end(), [](const SessionSummary& a, const SessionSummary& b) {
        if (a.updated != b.updated) return a.updated > b.updated;
        return a.id < b.id;
    });
    return out;
}

}  // namespace promptassist
