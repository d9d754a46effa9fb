#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "json_schema.hpp"
#include "test_env.hpp"

using namespace promptassist;
using namespace promptassist::testing;
using nlohmann::json;

namespace {

const std::string kGolden =
    "A young man is sitting on a bench near a small tree. He is wearing a green pullover, oil painting";

struct Run {
    int code = -1;
    std::string out;
    std::string err;

    [[nodiscard]] std::vector<std::string> lines() const {
        std::vector<std::string> v;
        std::istringstream ss(out);
        for (std::string line; std::getline(ss, line);) v.push_back(line);
        return v;
    }
};

Run run(std::vector<std::string> args, const std::string& stdin_text = "") {
    std::ostringstream out, err;
    std::istringstream in(stdin_text);
    cli::CliEnvironment io{out, err, in, [](const char*) -> std::optional<std::string> { return std::nullopt; }, {}};
    Run r;
    r.code = cli::run_cli(args, io);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string fixtures() { return source_path("fixtures/appendix.json").string(); }

// Deterministic completion server: the answer depends only on the prompt.
class FakeModel {
public:
    FakeModel() {
        server_.Post("/v1/completions", [this](const httplib::Request& req, httplib::Response& res) {
            ++calls;
            auto prompt = json::parse(req.body)["prompt"].get<std::string>();
            std::string text = " alpha, beta, gamma, delta, epsilon, zeta, eta, theta, iota, kappa";
            if (prompt.find("scene:") != std::string::npos) text = " A fox jumps over a log.";
            res.set_content(json{{"text", text + "\nnext: x"}}.dump(), "application/json");
        });
        server_.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeModel() {
        server_.stop();
        thread_.join();
    }
    [[nodiscard]] std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    std::atomic<int> calls{0};

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace

TEST(CliSuggest, SchoolPrintsTwelveLines) {
    auto r = run({"suggest", "--fixtures", fixtures(), "--step", "subjects", "--input", "school"});
    EXPECT_EQ(r.code, 0) << r.err;
    auto lines = r.lines();
    ASSERT_EQ(lines.size(), 12u);
    EXPECT_EQ(lines.front(), "blackboard");
}

TEST(CliSuggest, BlueIsSevenLinesAndExhausted) {
    auto r = run({"suggest", "--fixtures", fixtures(), "--step", "synonyms", "--input", "blue"});
    EXPECT_EQ(r.code, 3);
    EXPECT_EQ(r.lines().size(), 7u);
    EXPECT_FALSE(r.err.empty());
    auto enough = run({"suggest", "--fixtures", fixtures(), "--step", "synonyms", "--input", "blue", "--count", "7"});
    EXPECT_EQ(enough.code, 0);
}

TEST(CliSuggest, UsageErrors) {
    EXPECT_EQ(run({"suggest", "--fixtures", fixtures(), "--step", "scene"}).code, 2);
    EXPECT_EQ(run({"suggest", "--fixtures", fixtures()}).code, 2);
    EXPECT_EQ(run({"suggest", "--fixtures", fixtures(), "--step", "colour"}).code, 2);
    EXPECT_EQ(run({"suggest", "--fixtures", fixtures(), "--step", "style", "--count", "0"}).code, 2);
    EXPECT_EQ(run({"suggest", "--step", "style"}).code, 2);  // no backend configured
    EXPECT_EQ(run({"bogus"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(CliSuggest, MissingFixtureIsBackendError) {
    auto r = run({"suggest", "--fixtures", fixtures(), "--step", "subjects", "--input", "volcano"});
    EXPECT_EQ(r.code, 4);
}

TEST(CliSuggest, JsonMatchesSchemaAndExcludeFile) {
    auto r = run({"suggest", "--fixtures", fixtures(), "--step", "subjects", "--input", "school", "--json"});
    ASSERT_EQ(r.code, 0);
    auto doc = json::parse(r.out);
    auto errors = validate_schema(load_schema("suggestion_set"), doc);
    EXPECT_TRUE(errors.empty()) << r.out;
    EXPECT_EQ(doc["items"].size(), 12u);
    EXPECT_EQ(r.out, doc.dump() + "\n");

    TempDir dir;
    write_text(dir / "exclude.txt", "blackboard\n\nTeacher\n");
    auto ex = run({"suggest", "--fixtures", fixtures(), "--step", "subjects", "--input", "school", "--count", "5",
                   "--exclude-file", (dir / "exclude.txt").string()});
    EXPECT_EQ(ex.code, 0);
    EXPECT_EQ(ex.lines().front(), "chair");
    EXPECT_EQ(ex.lines().size(), 10u);
}

TEST(CliWizard, WalkthroughScriptPrintsGoldenLast) {
    auto r = run({"wizard", "--fixtures", fixtures(), "--script", source_path("fixtures/park_walkthrough.script")});
    EXPECT_EQ(r.code, 0) << r.err;
    auto lines = r.lines();
    ASSERT_FALSE(lines.empty());
    EXPECT_EQ(lines.back(), kGolden);
    EXPECT_NE(r.out.find("typed keystrokes: 0\n"), std::string::npos);
    EXPECT_NE(r.out.find("keystroke savings: 1.000\n"), std::string::npos);
}

TEST(CliWizard, ScriptFromStdinSkippingStyle) {
    std::string script =
        "accept park\nskip\nskip\ntype A dog runs on the beach\nskip\n";
    auto r = run({"wizard", "--fixtures", fixtures()}, script);
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.lines().back(), "A dog runs on the beach");
    EXPECT_NE(r.out.find("typed keystrokes: 23\n"), std::string::npos);
}

TEST(CliWizard, SkippingSceneNamesTheLine) {
    auto r = run({"wizard", "--fixtures", fixtures()}, "accept park\nskip\nskip\nskip\n");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 4: skip_not_allowed"), std::string::npos) << r.err;
}

TEST(CliWizard, BadScriptLinesAndUnfinishedScripts) {
    auto bad = run({"wizard", "--fixtures", fixtures()}, "# comment\n\njump\n");
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("line 3"), std::string::npos) << bad.err;

    auto pick_without_list = run({"wizard", "--fixtures", fixtures()}, "pick 1\n");
    EXPECT_EQ(pick_without_list.code, 2);
    EXPECT_NE(pick_without_list.err.find("line 1"), std::string::npos);

    auto no_scene = run({"wizard", "--fixtures", fixtures()}, "accept park\n");
    EXPECT_EQ(no_scene.code, 2);
    EXPECT_NE(no_scene.err.find("no_scene"), std::string::npos) << no_scene.err;
}

TEST(CliWizard, MoreAndReplace) {
    TempDir dir;
    write_text(dir / "src.json", R"({"queries": [{"step": "subjects", "inputs": ["park"], "completions": [
        " a1, a2, a3, a4, a5, a6, a7, a8, a9, a10",
        " b1, b2, b3, b4, b5, b6, b7, b8, b9, b10"]}]})");
    auto fx = (dir / "fx.json").string();
    ASSERT_EQ(run({"fixtures", "build", "--source", (dir / "src.json").string(), "--out", fx}).code, 0);
    std::string script =
        "type park\nsuggest\nmore\npick-add 2\npick 1\nskip\ntype A blue bird on a small tree\n"
        "replace blue green\nskip\n";
    auto r = run({"wizard", "--fixtures", fx}, script);
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("  1. b1\n"), std::string::npos) << r.out;
    EXPECT_EQ(r.lines().back(), "A green bird on a small tree");
}

TEST(CliFixturesBuild, ReproducesCheckedInFixtures) {
    TempDir dir;
    auto out = (dir / "appendix.json").string();
    auto r = run({"fixtures", "build", "--source", source_path("fixtures/appendix_source.json"), "--out", out});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_text(out), read_text(fixtures()));
}

TEST(CliFixturesBuild, RejectsDuplicatesAndMultiPromptQueries) {
    TempDir dir;
    write_text(dir / "dup.json", R"({"queries": [{"step": "subjects", "inputs": ["a"], "completions": ["x"]},
                                                 {"step": "subjects", "inputs": ["a"], "completions": ["y"]}]})");
    EXPECT_EQ(run({"fixtures", "build", "--source", (dir / "dup.json").string(), "--out", (dir / "o.json").string()})
                  .code,
              2);
    write_text(dir / "multi.json", R"({"queries": [{"step": "actions", "inputs": ["a", "b"], "completions": ["x"]}]})");
    EXPECT_EQ(
        run({"fixtures", "build", "--source", (dir / "multi.json").string(), "--out", (dir / "o.json").string()}).code,
        2);
    EXPECT_FALSE(std::filesystem::exists(dir / "o.json"));
}

TEST(CliRecord, RecordsThenReplays) {
    FakeModel model;
    TempDir dir;
    write_text(dir / "q.json", R"([{"step": "subjects", "inputs": ["school"]},
                                   {"step": "synonyms", "inputs": ["blue"]},
                                   {"step": "scene", "inputs": ["fox", "log"]}])");
    auto out = (dir / "rec.json").string();
    auto r = run({"record", "--backend", model.url(), "--out", out, "--queries", (dir / "q.json").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    auto entries = json::parse(read_text(out));
    EXPECT_GE(entries.size(), 3u);
    EXPECT_EQ(r.out, "recorded " + std::to_string(entries.size()) + " entries to " + out + "\n");

    auto again = (dir / "rec2.json").string();
    EXPECT_EQ(run({"record", "--backend", model.url(), "--out", again, "--queries", (dir / "q.json").string()}).code,
              0);
    EXPECT_EQ(read_text(again), read_text(out));

    auto replay = run({"suggest", "--fixtures", out, "--step", "subjects", "--input", "school"});
    EXPECT_EQ(replay.code, 0);
    EXPECT_EQ(replay.lines().front(), "alpha");
    EXPECT_EQ(replay.lines().size(), 10u);
}

TEST(CliRecord, UnreachableBackendWritesNothing) {
    TempDir dir;
    write_text(dir / "q.json", R"([{"step": "subjects", "inputs": ["school"]}])");
    auto out = dir / "rec.json";
    auto r = run({"record", "--backend", "http://127.0.0.1:1", "--out", out.string(), "--queries",
                  (dir / "q.json").string()});
    EXPECT_EQ(r.code, 4);
    EXPECT_FALSE(std::filesystem::exists(out));
    EXPECT_FALSE(std::filesystem::exists(out.string() + ".tmp"));
}

TEST(CliServe, PortValidation) {
    EXPECT_EQ(run({"serve", "--fixtures", fixtures(), "--port", "70000"}).code, 2);
}

TEST(CliServe, ServesUntilCancelled) {
    std::ostringstream out, err;
    std::istringstream in;
    std::stop_source stop;
    std::atomic<int> code{-1};
    std::thread t([&] {
        cli::CliEnvironment io{out, err, in, [](const char*) -> std::optional<std::string> { return std::nullopt; },
                               stop.get_token()};
        code = cli::run_cli({"serve", "--fixtures", fixtures(), "--port", "0"}, io);
    });
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    stop.request_stop();
    t.join();
    EXPECT_EQ(code, 0) << err.str();
    EXPECT_EQ(out.str().rfind("listening on http://127.0.0.1:", 0), 0u);
}
