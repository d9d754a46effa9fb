#include <gtest/gtest.h>

#include <chrono>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fake_backend.hpp"
#include "json_schema.hpp"
#include "promptassist/api_service.hpp"
#include "test_env.hpp"

using namespace promptassist;
using namespace promptassist::testing;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

const std::string kScene = "A young man is sitting on a bench near a small tree. He is wearing a green pullover";

Engine fixture_engine() {
    EngineConfig c;
    c.fixture_path = source_path("fixtures/appendix.json");
    return make_engine(c);
}

Engine engine_over(std::shared_ptr<Backend> backend) {
    Engine e;
    e.config.mode = BackendMode::Live;
    e.backend = backend;
    e.client = std::make_shared<LlmClient>(backend, LlmClientOptions{10s, 5ms});
    return e;
}

void expect_schema(const std::string& name, const json& doc) {
    auto errors = validate_schema(load_schema(name), doc);
    EXPECT_TRUE(errors.empty()) << name << ": " << (errors.empty() ? "" : errors.front()) << "\n" << doc.dump();
}

struct Client {
    api::ApiService& api;

    api::Response post(const std::string& path, const json& body = json::object()) {
        return api.handle("POST", path, body.dump());
    }
    api::Response get(const std::string& path) { return api.handle("GET", path, ""); }

    std::string create() {
        auto r = post("/sessions");
        EXPECT_EQ(r.status, 201);
        return r.body["id"].get<std::string>();
    }
    api::Response act(const std::string& id, json body) { return post("/sessions/" + id + "/action", body); }
};

}  // namespace

TEST(ApiErrors, MappingIsTotalAndUserFacing) {
    auto schema = load_schema("error");
    for (int i = 0; i <= static_cast<int>(ErrorCode::IoError); ++i) {
        for (bool production : {true, false}) {
            auto e = api::map_error(static_cast<ErrorCode>(i), production);
            EXPECT_FALSE(e.code.empty());
            EXPECT_GE(e.http_status, 400);
            auto errors = validate_schema(schema, json{{"error", api::to_json(e)}});
            EXPECT_TRUE(errors.empty()) << e.code << ": " << e.message;
        }
    }
    EXPECT_EQ(api::map_error(ErrorCode::MissingFixture, true).code, "backend_unavailable");
    EXPECT_EQ(api::map_error(ErrorCode::MissingFixture, false).code, "missing_fixture");
    EXPECT_EQ(api::map_error(ErrorCode::Timeout).http_status, 504);
    EXPECT_TRUE(api::map_error(ErrorCode::Timeout).retriable);
    EXPECT_FALSE(api::map_error(ErrorCode::WrongStep).retriable);
    EXPECT_EQ(api::map_error(ErrorCode::EmptyPrompt).message, "Your prompt needs a scene before it can be finished.");
}

TEST(ApiErrors, NonEngineExceptionsAreInternal) {
    auto e = api::map_exception(std::make_exception_ptr(std::runtime_error("x")));
    EXPECT_EQ(e.code, "internal_error");
    EXPECT_EQ(e.http_status, 500);
    EXPECT_EQ(api::map_exception(std::make_exception_ptr(Error(ErrorCode::NoScene, "x"))).code, "no_scene");
}

TEST(Api, WalkthroughOverRoutes) {
    api::ApiService service(fixture_engine(), nullptr, Wizard(deterministic_options()));
    Client c{service};
    auto id = c.create();
    EXPECT_EQ(id, "session-0");

    auto env = c.post("/sessions/" + id + "/suggest", {{"step", "environment"}});
    EXPECT_EQ(env.status, 200);
    expect_schema("suggestion_set", env.body);
    EXPECT_EQ(env.body["items"][0], "park");

    EXPECT_EQ(c.act(id, {{"kind", "accept"}, {"payload", "park"}}).status, 200);
    auto subjects = c.post("/sessions/" + id + "/suggest", {{"step", "subjects"}});
    EXPECT_EQ(subjects.body["items"][0], "tree");
    EXPECT_EQ(c.act(id, {{"kind", "accept"}, {"payload", "tree"}, {"advance", false}}).status, 200);
    EXPECT_EQ(c.act(id, {{"kind", "accept"}, {"payload", "bench"}}).status, 200);
    EXPECT_EQ(c.act(id, {{"kind", "skip"}, {"step", "actions"}}).status, 200);

    auto scenes = c.post("/sessions/" + id + "/suggest", {{"step", "scene"}});
    EXPECT_EQ(scenes.status, 422);
    expect_schema("error", scenes.body);
    EXPECT_EQ(scenes.body["error"]["code"], "exhausted_suggestions");
    EXPECT_EQ(scenes.body["suggestions"]["items"][0], kScene);

    EXPECT_EQ(c.act(id, {{"kind", "accept"}, {"payload", kScene}}).status, 200);
    auto style = c.post("/sessions/" + id + "/suggest", {{"step", "style"}});
    EXPECT_EQ(style.status, 200);
    auto done = c.act(id, {{"kind", "accept"}, {"payload", "oil painting"}});
    EXPECT_EQ(done.body["step"], "done");
    expect_schema("session", done.body);

    auto prompt = c.get("/sessions/" + id + "/prompt");
    EXPECT_EQ(prompt.status, 200);
    expect_schema("prompt", prompt.body);
    EXPECT_EQ(prompt.body["text"], kScene + ", oil painting");
    EXPECT_EQ(prompt.body["effort"]["typed_keystrokes"], 0);

    // Reading the prompt does not log an event.
    auto events_before = c.get("/sessions/" + id).body["events"].size();
    (void)c.get("/sessions/" + id + "/prompt");
    EXPECT_EQ(c.get("/sessions/" + id).body["events"].size(), events_before);
}

TEST(Api, SchoolSubjectsAndBlueSynonyms) {
    api::ApiService service(fixture_engine(), nullptr, Wizard(deterministic_options()));
    Client c{service};
    auto id = c.create();
    auto school = c.post("/sessions/" + id + "/suggest", {{"step", "subjects"}, {"inputs", {"school"}}});
    EXPECT_EQ(school.status, 200);
    EXPECT_EQ(school.body["items"].size(), 12u);
    auto blue = c.post("/sessions/" + id + "/suggest", {{"step", "synonyms"}, {"inputs", {"blue"}}});
    EXPECT_EQ(blue.status, 422);
    EXPECT_EQ(blue.body["suggestions"]["items"].size(), 7u);
    EXPECT_EQ(blue.body["suggestions"]["attempts_used"], 3);
    EXPECT_TRUE(blue.body["error"]["retriable"].get<bool>());
}

TEST(Api, ErrorsDoNotMutateSessions) {
    api::ApiService service(fixture_engine(), nullptr, Wizard(deterministic_options()));
    Client c{service};
    auto id = c.create();
    auto before = c.get("/sessions/" + id).body;

    struct Case {
        json body;
        int status;
        std::string code;
    };
    std::vector<Case> cases{
        {{{"kind", "accept"}, {"payload", "  "}}, 400, "empty_payload"},
        {{{"kind", "accept"}, {"payload", "tree"}, {"step", "subjects"}}, 409, "wrong_step"},
        {{{"kind", "dance"}}, 400, "invalid_request"},
        {{{"kind", "accept"}, {"payload", 3}}, 400, "invalid_request"},
        {{{"kind", "replace_word"}, {"target", "a"}, {"payload", "b"}}, 404, "no_scene"},
        {{{"kind", "accept"}, {"payload", "x"}, {"advance", "yes"}}, 400, "invalid_request"},
    };
    for (const auto& tc : cases) {
        auto r = c.act(id, tc.body);
        EXPECT_EQ(r.status, tc.status) << tc.body.dump();
        EXPECT_EQ(r.body["error"]["code"], tc.code) << tc.body.dump();
        expect_schema("error", r.body);
    }
    auto bad_json = service.handle("POST", "/sessions/" + id + "/action", "{nope");
    EXPECT_EQ(bad_json.status, 400);
    EXPECT_EQ(c.get("/sessions/" + id).body, before);

    auto prompt = c.get("/sessions/" + id + "/prompt");
    EXPECT_EQ(prompt.status, 404);
    EXPECT_EQ(prompt.body["error"]["message"], "Your prompt needs a scene before it can be finished.");

    auto no_env = c.post("/sessions/" + id + "/suggest", {{"step", "subjects"}});
    EXPECT_EQ(no_env.status, 400);
    auto bad_step = c.post("/sessions/" + id + "/suggest", {{"step", "colour"}});
    EXPECT_EQ(bad_step.status, 400);
    auto bad_count = c.post("/sessions/" + id + "/suggest", {{"step", "style"}, {"min_count", 0}});
    EXPECT_EQ(bad_count.status, 400);
}

TEST(Api, MissingFixtureDependsOnMode) {
    for (bool production : {true, false}) {
        api::ApiOptions o;
        o.production = production;
        api::ApiService service(fixture_engine(), nullptr, Wizard(deterministic_options()), o);
        Client c{service};
        auto id = c.create();
        auto r = c.post("/sessions/" + id + "/suggest", {{"step", "subjects"}, {"inputs", {"volcano"}}});
        EXPECT_EQ(r.body["error"]["code"], production ? "backend_unavailable" : "missing_fixture");
    }
}

TEST(Api, UnknownRoutesAndIds) {
    api::ApiService service(fixture_engine(), nullptr, Wizard(deterministic_options()));
    Client c{service};
    EXPECT_EQ(c.get("/nowhere").status, 404);
    EXPECT_EQ(c.get("/sessions/missing").status, 404);
    EXPECT_EQ(c.get("/sessions/..%2F").status, 404);
    EXPECT_EQ(service.handle("DELETE", "/sessions", "").status, 404);
    EXPECT_EQ(c.get("/sessions/missing").body["error"]["code"], "not_found");
}

TEST(Api, HealthAndListing) {
    api::ApiService service(fixture_engine(), nullptr, Wizard(deterministic_options()));
    Client c{service};
    auto h = c.get("/healthz");
    EXPECT_EQ(h.status, 200);
    expect_schema("health", h.body);
    EXPECT_EQ(h.body["status"], "ok");
    EXPECT_EQ(h.body["mode"], "fixture");

    auto first = c.create();
    auto second = c.create();
    c.act(first, {{"kind", "type"}, {"payload", "beach"}});
    auto list = c.get("/sessions");
    expect_schema("session_list", list.body);
    ASSERT_EQ(list.body["sessions"].size(), 2u);
    EXPECT_EQ(list.body["sessions"][0]["id"], first);
    EXPECT_EQ(list.body["sessions"][1]["id"], second);
}

TEST(Api, PersistedSessionsSurviveRestart) {
    TempDir dir;
    std::string id;
    {
        api::ApiService service(fixture_engine(), std::make_shared<SessionStore>(dir.path()),
                                Wizard(deterministic_options()));
        Client c{service};
        id = c.create();
        c.act(id, {{"kind", "accept"}, {"payload", "park"}});
    }
    api::ApiService service(fixture_engine(), std::make_shared<SessionStore>(dir.path()),
                            Wizard(deterministic_options(2'000'000'000'000)));
    Client c{service};
    auto s = c.get("/sessions/" + id);
    EXPECT_EQ(s.status, 200);
    EXPECT_EQ(s.body["environment"], "park");
    EXPECT_EQ(c.get("/sessions").body["sessions"].size(), 1u);
}

TEST(Api, ConcurrentActionsOnOneSessionSerialize) {
    api::ApiService service(fixture_engine(), nullptr, Wizard(deterministic_options()));
    Client c{service};
    auto id = c.create();
    c.act(id, {{"kind", "accept"}, {"payload", "park"}});
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&, t] {
            for (int k = 0; k < 10; ++k) {
                auto r = c.act(id, {{"kind", "accept"},
                                    {"payload", "item" + std::to_string(t * 10 + k)},
                                    {"advance", false}});
                EXPECT_EQ(r.status, 200);
            }
        });
    }
    for (auto& th : threads) th.join();
    auto s = c.get("/sessions/" + id).body;
    EXPECT_EQ(s["subjects"].size(), 80u);
    EXPECT_EQ(s["events"].size(), 81u);
}

TEST(Api, CancelledSuggestLeavesSessionUntouched) {
    auto backend = std::make_shared<BlockingBackend>();
    api::ApiService service(engine_over(backend), nullptr, Wizard(deterministic_options()));
    Client c{service};
    auto id = c.create();
    auto before = c.get("/sessions/" + id).body;
    std::stop_source cancel;
    std::thread t([&] {
        backend->wait_started();
        cancel.request_stop();
    });
    auto r = service.handle("POST", "/sessions/" + id + "/suggest", R"({"step":"subjects","inputs":["x"]})",
                            cancel.get_token());
    t.join();
    EXPECT_EQ(r.status, 499) << r.body.dump();
    EXPECT_EQ(r.body["error"]["code"], "cancelled");
    EXPECT_EQ(c.get("/sessions/" + id).body, before);
}

TEST(ApiHttp, ServesJsonWithCors) {
    api::ApiOptions o;
    o.cors_origin = "https://ui.example";
    api::ApiService service(fixture_engine(), nullptr, Wizard(deterministic_options()), o);
    int port = service.start("127.0.0.1", 0);
    httplib::Client http("127.0.0.1", port);
    auto created = http.Post("/sessions", "", "application/json");
    ASSERT_TRUE(created);
    EXPECT_EQ(created->status, 201);
    EXPECT_EQ(created->get_header_value("Access-Control-Allow-Origin"), "https://ui.example");
    auto id = json::parse(created->body)["id"].get<std::string>();

    auto suggest = http.Post("/sessions/" + id + "/suggest", R"({"step":"subjects","inputs":["school"]})",
                             "application/json");
    ASSERT_TRUE(suggest);
    EXPECT_EQ(suggest->status, 200);
    EXPECT_EQ(json::parse(suggest->body)["items"].size(), 12u);

    auto preflight = http.Options("/sessions");
    ASSERT_TRUE(preflight);
    EXPECT_EQ(preflight->status, 204);
    EXPECT_EQ(preflight->get_header_value("Access-Control-Allow-Origin"), "https://ui.example");
    service.stop();
}

TEST(ApiHttp, ClientDisconnectCancelsSuggest) {
    auto backend = std::make_shared<BlockingBackend>();
    api::ApiService service(engine_over(backend), nullptr, Wizard(deterministic_options()));
    int port = service.start("127.0.0.1", 0);
    auto id = service.handle("POST", "/sessions", "").body["id"].get<std::string>();
    auto before = service.handle("GET", "/sessions/" + id, "").body;

    httplib::Client http("127.0.0.1", port);
    http.set_read_timeout(std::chrono::milliseconds(200));
    auto t0 = std::chrono::steady_clock::now();
    auto r = http.Post("/sessions/" + id + "/suggest", R"({"step":"subjects","inputs":["x"]})", "application/json");
    EXPECT_FALSE(r);  // the client gave up
    http.stop();

    while (backend->cancelled == 0 && std::chrono::steady_clock::now() - t0 < 5s) std::this_thread::sleep_for(5ms);
    EXPECT_EQ(backend->cancelled, 1);
    EXPECT_LT(std::chrono::steady_clock::now() - t0, 2s);
    EXPECT_EQ(service.handle("GET", "/sessions/" + id, "").body, before);
    service.stop();
}
