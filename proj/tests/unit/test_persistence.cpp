#include <gtest/gtest.h>

#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "json_schema.hpp"
#include "promptassist/error.hpp"
#include "promptassist/persistence.hpp"
#include "test_env.hpp"

using namespace promptassist;
using namespace promptassist::testing;
using nlohmann::json;

namespace {

const std::string kScene = "A young man is sitting on a bench near a small tree. He is wearing a green pullover";

Session walkthrough(const Wizard& w) {
    auto s = w.create_session();
    s = w.apply(s, Action::accept("park"));
    s = w.apply(s, Action::accept("tree", false));
    s = w.apply(s, Action::accept("bench"));
    s = w.apply(s, Action::skip());
    s = w.apply(s, Action::accept(kScene));
    s = w.apply(s, Action::accept("oil painting"));
    return s;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::InvalidConfig;
}

}  // namespace

TEST(SessionStore, FreshSessionRoundTrips) {
    TempDir dir;
    SessionStore store(dir.path());
    Wizard w(deterministic_options());
    auto s = w.create_session();
    auto path = store.save(s);
    EXPECT_TRUE(std::filesystem::exists(path));
    EXPECT_EQ(path, dir / (s.id + ".json"));
    EXPECT_EQ(store.load(s.id), s);
}

TEST(SessionStore, WalkthroughReloadsToSamePrompt) {
    TempDir dir;
    SessionStore store(dir.path());
    Wizard w(deterministic_options());
    auto s = walkthrough(w);
    store.save(s, {{"backend", "fixture"}});
    auto loaded = store.load(s.id);
    EXPECT_EQ(loaded, s);
    EXPECT_EQ(w.assemble(loaded).text, kScene + ", oil painting");
}

TEST(SessionStore, RecordIsUtf8JsonWithLfAndMatchesSchema) {
    TempDir dir;
    SessionStore store(dir.path());
    Wizard w(deterministic_options());
    auto s = walkthrough(w);
    s = w.replace_word(s, "small", "giant");
    store.save(s, {{"backend", "fixture"}});
    auto text = read_text(store.path_for(s.id));
    EXPECT_EQ(text, SessionStore::serialize(s, {{"backend", "fixture"}}));
    EXPECT_EQ(text.find('\r'), std::string::npos);
    EXPECT_EQ(text.back(), '\n');
    auto errors = validate_schema(load_schema("session_record"), json::parse(text));
    EXPECT_TRUE(errors.empty()) << errors.front();
}

TEST(SessionStore, UnknownAndInvalidIdsAreNotFound) {
    TempDir dir;
    SessionStore store(dir.path());
    EXPECT_EQ(code_of([&] { (void)store.load("nope"); }), ErrorCode::NotFound);
    EXPECT_EQ(code_of([&] { (void)store.load("../etc/passwd"); }), ErrorCode::NotFound);
    EXPECT_EQ(code_of([&] { (void)store.load(""); }), ErrorCode::NotFound);
}

TEST(SessionStore, TruncatedFileIsCorrupt) {
    TempDir dir;
    SessionStore store(dir.path());
    Wizard w(deterministic_options());
    auto s = walkthrough(w);
    auto text = SessionStore::serialize(s);
    write_text(store.path_for(s.id), text.substr(0, text.size() / 2));
    EXPECT_EQ(code_of([&] { (void)store.load(s.id); }), ErrorCode::CorruptRecord);
}

TEST(SessionStore, SnapshotMustAgreeWithLog) {
    Wizard w(deterministic_options());
    auto s = walkthrough(w);
    auto record = json::parse(SessionStore::serialize(s));
    record["snapshot"]["style"] = "pencil drawing";
    EXPECT_EQ(code_of([&] { (void)SessionStore::deserialize(record.dump()); }), ErrorCode::CorruptRecord);

    auto bad_event = json::parse(SessionStore::serialize(s));
    bad_event["events"][0]["kind"] = "teleported";
    EXPECT_EQ(code_of([&] { (void)SessionStore::deserialize(bad_event.dump()); }), ErrorCode::CorruptRecord);

    auto no_version = json::parse(SessionStore::serialize(s));
    no_version.erase("schema_version");
    EXPECT_EQ(code_of([&] { (void)SessionStore::deserialize(no_version.dump()); }), ErrorCode::CorruptRecord);
}

TEST(SessionStore, SchemaMismatch) {
    Wizard w(deterministic_options());
    auto record = json::parse(SessionStore::serialize(w.create_session()));
    record["schema_version"] = kSessionSchemaVersion + 1;
    EXPECT_EQ(code_of([&] { (void)SessionStore::deserialize(record.dump()); }), ErrorCode::SchemaMismatch);
}

TEST(SessionStore, FileUnderWrongNameIsCorrupt) {
    TempDir dir;
    SessionStore store(dir.path());
    Wizard w(deterministic_options());
    auto s = w.create_session();
    write_text(store.path_for("other"), SessionStore::serialize(s));
    EXPECT_EQ(code_of([&] { (void)store.load("other"); }), ErrorCode::CorruptRecord);
}

TEST(SessionStore, RefusesInconsistentSessions) {
    TempDir dir;
    SessionStore store(dir.path());
    Wizard w(deterministic_options());
    auto s = walkthrough(w);
    s.style = "tampered";
    EXPECT_EQ(code_of([&] { store.save(s); }), ErrorCode::SerializationFailure);
    auto bad_id = w.create_session();
    bad_id.id = "has/slash";
    EXPECT_EQ(code_of([&] { store.save(bad_id); }), ErrorCode::SerializationFailure);
}

TEST(SessionStore, CrashBeforeRenameKeepsPriorRecord) {
    TempDir dir;
    SessionStore store(dir.path());
    Wizard w(deterministic_options());
    auto s = w.create_session();
    s = w.apply(s, Action::accept("park"));
    store.save(s);
    auto prior = read_text(store.path_for(s.id));

    auto next = w.apply(s, Action::accept("tree"));
    store.set_before_rename_hook([] { throw std::runtime_error("simulated crash"); });
    EXPECT_THROW(store.save(next), std::runtime_error);
    store.set_before_rename_hook({});

    EXPECT_EQ(read_text(store.path_for(s.id)), prior);
    EXPECT_EQ(store.load(s.id), s);
}

TEST(SessionStore, ListingIsNewestFirstAndSkipsJunk) {
    TempDir dir;
    SessionStore store(dir.path());
    EXPECT_TRUE(store.list_sessions().empty());

    Wizard w(deterministic_options());
    auto older = walkthrough(w);
    auto newer = w.apply(w.create_session(), Action::accept("beach"));
    store.save(newer);
    store.save(older);
    write_text(dir / "junk.json", "{");
    write_text(dir / "notes.txt", "hello");

    auto list = store.list_sessions();
    ASSERT_EQ(list.size(), 2u);
    EXPECT_EQ(list[0].id, newer.id);
    EXPECT_EQ(list[0].preview, "");
    EXPECT_EQ(list[1].id, older.id);
    EXPECT_EQ(list[1].preview, kScene + ", oil painting");
    EXPECT_GT(list[0].updated, list[1].updated);
}

TEST(SessionStore, ConcurrentSavesOfDistinctSessions) {
    TempDir dir;
    SessionStore store(dir.path());
    Wizard w(deterministic_options());
    std::vector<Session> sessions;
    for (int i = 0; i < 8; ++i) sessions.push_back(walkthrough(w));
    std::vector<std::thread> threads;
    for (const auto& s : sessions) {
        threads.emplace_back([&store, &s] {
            for (int k = 0; k < 20; ++k) store.save(s);
        });
    }
    for (auto& t : threads) t.join();
    for (const auto& s : sessions) EXPECT_EQ(store.load(s.id), s);
}

TEST(SessionId, Validity) {
    EXPECT_TRUE(is_valid_session_id("session-0"));
    EXPECT_TRUE(is_valid_session_id(std::string(64, 'a')));
    EXPECT_FALSE(is_valid_session_id(std::string(65, 'a')));
    EXPECT_FALSE(is_valid_session_id("a.b"));
    EXPECT_FALSE(is_valid_session_id(""));
}
