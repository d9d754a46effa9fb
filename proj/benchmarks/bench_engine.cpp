#include <benchmark/benchmark.h>

#include <memory>
#include <string>
#include <vector>

#include "promptassist/completion_parser.hpp"
#include "promptassist/fixture_store.hpp"
#include "promptassist/suggestion_service.hpp"
#include "promptassist/templates.hpp"
#include "promptassist/wizard.hpp"

using namespace promptassist;

namespace {

const std::string kSchool =
    " blackboard, teacher, chair, book, student, class, eraser, whiteboard, notebook, pen, pencil, eraser, paper";
const std::string kScene = "A young man is sitting on a bench near a small tree. He is wearing a green pullover";

void BM_ParseCommaList(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(parse_comma_list(kSchool, 50));
}
BENCHMARK(BM_ParseCommaList);

void BM_ParseScene(benchmark::State& state) {
    const std::string raw = " " + kScene + ",\n continued on a second line,\nwords: next";
    for (auto _ : state) benchmark::DoNotOptimize(parse_scene(raw));
}
BENCHMARK(BM_ParseScene);

void BM_RenderSceneTemplate(benchmark::State& state) {
    const auto& tmpl = builtin_template(TemplateId::SceneFromWords);
    std::vector<std::string> words{join_words(std::vector<std::string>{"tree", "bench", "sit"})};
    for (auto _ : state) benchmark::DoNotOptimize(render(tmpl, words));
}
BENCHMARK(BM_RenderSceneTemplate);

void BM_FixtureKey(benchmark::State& state) {
    const auto& prompt = render(builtin_template(TemplateId::SubjectsForEnvironment), std::vector<std::string>{"park"});
    for (auto _ : state) benchmark::DoNotOptimize(FixtureStore::key(prompt.text, "0"));
}
BENCHMARK(BM_FixtureKey);

// Uncached suggest through replayed fixtures: a fresh service each iteration.
void BM_SuggestFromFixtures(benchmark::State& state) {
    auto store = std::make_shared<FixtureStore>();
    SuggestionQuery query{SuggestionKind::Subjects, {"school"}, std::nullopt, {}};
    store->put(prompts_for(query).front().text, "0", kSchool);
    auto client = std::make_shared<LlmClient>(std::make_shared<FixtureBackend>(store));
    for (auto _ : state) {
        SuggestionService service(client);
        benchmark::DoNotOptimize(service.suggest(query));
    }
}
BENCHMARK(BM_SuggestFromFixtures);

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

void BM_WizardWalkthrough(benchmark::State& state) {
    Wizard w;
    for (auto _ : state) {
        auto s = walkthrough(w);
        benchmark::DoNotOptimize(w.assemble(s));
    }
}
BENCHMARK(BM_WizardWalkthrough);

void BM_WizardReplay(benchmark::State& state) {
    Wizard w;
    auto s = walkthrough(w);
    for (int i = 0; i < state.range(0); ++i) {
        s = w.apply(s, Action::back());
        s = w.apply(s, Action::accept("oil painting"));
    }
    for (auto _ : state) benchmark::DoNotOptimize(w.replay(s.id, s.created, s.events));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.events.size()));
}
BENCHMARK(BM_WizardReplay)->Arg(0)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
