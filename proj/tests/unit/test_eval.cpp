// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <relep/eval.hpp>

#include "test_doctest.hpp"

using namespace relep;

namespace
{

const auto& library = defaultLibrary();

TaskSuite household()
{
    return loadSuite(testing::dataDir() / "suites" / "household.json");
}

TaskSuite conditionalLight()
{
    return loadSuite(testing::dataDir() / "suites" / "conditional_light.json");
}

const SuiteEpisode& firstEpisodeOf(const std::vector<SuiteEpisode>& episodes, std::string_view idPrefix)
{
    auto const it = std::ranges::find_if(episodes, [&](const SuiteEpisode& e) { return e.spec.id.starts_with(idPrefix); });
    REQUIRE(it != episodes.end());
    return *it;
}

EpisodeTrace runOracle(const SuiteEpisode& episode, bool amnesic = false)
{
    std::shared_ptr<Backend> backend = std::make_shared<ScriptedOracle>(*episode.spec.script);
    if (amnesic)
        backend = std::make_shared<AmnesicBackend>(backend);
    return runEpisode(episode.spec, *backend, library).trace;
}

Ratio ratio(std::uint64_t num, std::uint64_t den)
{
    return Ratio { num, den };
}

} // namespace

TEST_CASE("percentages are exact and ties go to even")
{
    // Frozen from an exact decimal computation with half-even quantization.
    CHECK(formatPercent(ratio(49, 80)) == "61.2%");
    CHECK(formatPercent(ratio(43, 80)) == "53.8%");
    CHECK(formatPercent(ratio(41, 80)) == "51.2%");
    CHECK(formatPercent(ratio(145, 175)) == "82.9%");
    CHECK(formatPercent(ratio(51, 121)) == "42.1%");
    CHECK(formatPercent(ratio(1, 16)) == "6.2%");
    CHECK(formatPercent(ratio(3, 16)) == "18.8%");
    CHECK(formatPercent(ratio(2, 3)) == "66.7%");
    CHECK(formatPercent(ratio(1, 1600)) == "0.1%");
    CHECK(formatPercent(ratio(0, 7)) == "0.0%");
    CHECK(formatPercent(ratio(7, 7)) == "100.0%");
    CHECK(formatPercent(ratio(0, 0)) == "-");
}

TEST_CASE("baseline rows aggregate as a ratio of sums")
{
    auto const path = testing::dataDir() / "baselines.json";
    auto const gpt = aggregate(loadBaselineRows(path, "GPT-4V*"));
    CHECK(gpt.total.ipsr == ratio(49, 80));
    CHECK(gpt.total.ssr == ratio(51, 121));
    CHECK(gpt.total.sr.den == 0);

    auto const vila = aggregate(loadBaselineRows(path, "VILA*"));
    CHECK(vila.total.ipsr == ratio(43, 80));
    CHECK(vila.total.ssr == ratio(145, 175));
    CHECK(vila.total.sr == ratio(41, 80));

    auto const listedOnly = aggregate(loadBaselineRows(path, "VILA*"), false);
    CHECK(listedOnly.rows.size() == 7);
    CHECK(listedOnly.total.ipsr == ratio(43, 70));

    auto const relep = aggregate(loadBaselineRows(path, "ReLEP"));
    CHECK(formatPercent(relep.total.ssr) == "100.0%");
    CHECK_THROWS_AS(static_cast<void>(loadBaselineRows(path, "nobody")), ConfigError);
}

TEST_CASE("rows of the same task merge")
{
    auto const table = aggregate({ TaskMetrics { "A", ratio(1, 1), ratio(2, 3), ratio(1, 1), false },
                                   TaskMetrics { "B", ratio(0, 1), ratio(0, 3), ratio(0, 1), false },
                                   TaskMetrics { "A", ratio(0, 1), ratio(1, 3), ratio(0, 1), false } });
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].ssr == ratio(3, 6));
    CHECK(table.total.sr == ratio(1, 3));
    auto const again = metricsFromJson(metricsToJson(table));
    CHECK(again.rows == table.rows);
    CHECK(again.total == table.total);
    CHECK(renderMetricsTable(table).find("3/6 50.0%") != std::string::npos);
}

TEST_CASE("goal predicates")
{
    auto const goal = goalFromJson(nlohmann::json::parse(R"json({
        "any_of": [
            [ { "object": "fridge", "state": "closed" }, { "object": "water bottle", "on": "user" } ],
            [ { "object": "water bottle", "held": true }, { "robot_zone": "living room" } ]
        ]
    })json"));
    auto world = loadSceneFile(testing::scenePath("kitchen"));
    CHECK_FALSE(goal.holds(world, {}));
    CHECK(goalFromJson(goalToJson(goal)).anyOf.size() == 2);

    for (auto const* text: { "Navigate(fridge)", "Pull(fridge door, backward)", "Grasp(water bottle)", "Navigate(user)" })
    {
        auto const call = parsePlan(std::string(text) + "\nDone", library).plan().steps.front();
        world = applySkill(world, call).world;
    }
    CHECK(goal.holds(world, {}));

    auto const said = goalFromJson(nlohmann::json::parse(R"json({ "all": [ { "utterance_contains": "ITSELF" } ] })json"));
    CHECK(said.holds(world, { "the robot is itself" }));
    CHECK_FALSE(said.holds(world, { "nothing" }));
    CHECK_FALSE(GoalPredicate {}.holds(world, {}));
    CHECK_THROWS_AS(static_cast<void>(goalFromJson(nlohmann::json::parse(R"({ "all": [ { "colour": "red" } ] })"))), ConfigError);
}

TEST_CASE("gold judge on oracle and amnesic traces")
{
    auto const suite = household();
    auto const episodes = suite.episodes();
    CHECK(episodes.size() == 80);
    auto const& button = firstEpisodeOf(episodes, "push-button-v1-p01");
    auto const judge = judgeFor(suite, button, JudgeMode::Gold, library);

    auto const oracle = runOracle(button);
    CHECK(judgeInitialPlan(oracle, judge));
    auto const steps = judgeSteps(oracle, judge);
    CHECK(steps.correct == 3);
    CHECK(steps.attempted == 3);
    CHECK(judgeSuccess(oracle, judge));

    auto const amnesic = runOracle(button, true);
    CHECK(amnesic.verdict.kind == VerdictKind::ExhaustedRounds);
    CHECK(judgeInitialPlan(amnesic, judge));
    auto const amnesicSteps = judgeSteps(amnesic, judge);
    CHECK(amnesicSteps.correct == 1);
    CHECK(amnesicSteps.attempted == 2);
    CHECK_FALSE(judgeSuccess(amnesic, judge));
}

TEST_CASE("goal judge scores plans by simulation")
{
    auto const suite = household();
    auto const episodes = suite.episodes();
    auto const& water = firstEpisodeOf(episodes, "bring-water-v1");
    auto const judge = judgeFor(suite, water, JudgeMode::Goal, library);
    auto const memory = freshMemory(judge.initialWorld);

    auto const noPull = parsePlan("Navigate(fridge)\nGrasp(water bottle)\nNavigate(user)\nPut(water bottle, user, front)\nDone", library);
    CHECK_FALSE(planReachesGoal(noPull.plan(), judge.initialWorld, memory, judge));
    auto const gold = judge.gold.front().segments.front();
    CHECK(planReachesGoal(gold, judge.initialWorld, memory, judge));
    auto const leftOpen = parsePlan("Navigate(fridge)\nPull(fridge door, backward)\nGrasp(water bottle)\nNavigate(user)\nDone", library);
    CHECK_FALSE(planReachesGoal(leftOpen.plan(), judge.initialWorld, memory, judge));

    auto const trace = runOracle(water);
    CHECK(judgeInitialPlan(trace, judge));
    CHECK(judgeSuccess(trace, judge));
    auto const steps = judgeSteps(trace, judge);
    CHECK(steps.correct == steps.attempted);
    CHECK(steps.attempted == trace.rounds.size());
}

TEST_CASE("pending segments are judged in both light variants")
{
    auto const suite = conditionalLight();
    auto const episodes = suite.episodes();
    REQUIRE(episodes.size() == 6);
    for (auto const& episode: episodes)
    {
        INFO(episode.spec.id);
        auto const trace = runOracle(episode);
        auto const gold = judgeFor(suite, episode, JudgeMode::Gold, library);
        auto const goal = judgeFor(suite, episode, JudgeMode::Goal, library);
        auto const lightOn = episode.variantIndex == 0;
        CHECK(trace.rounds.size() == (lightOn ? 3 : 2));
        CHECK(judgeInitialPlan(trace, gold));
        CHECK(judgeInitialPlan(trace, goal));
        auto const steps = judgeSteps(trace, gold);
        CHECK(steps.correct == steps.attempted);
        CHECK(steps.attempted == trace.rounds.size());
        CHECK(judgeSuccess(trace, gold));
        CHECK(judgeSuccess(trace, goal));
    }
}

TEST_CASE("suite runs persist traces that rescore identically")
{
    auto const suite = conditionalLight();
    testing::TempDir out;
    auto options = SuiteOptions {};
    options.outDir = out.path();
    auto const factory = [](const SuiteEpisode& episode, const TaskSuite&) -> std::shared_ptr<Backend> {
        return std::make_shared<ScriptedOracle>(*episode.spec.script);
    };
    auto const run = runSuite(suite, factory, library, options);
    CHECK(run.metrics.total.sr == ratio(6, 6));
    CHECK(std::filesystem::exists(out.path() / "metrics.json"));
    CHECK(std::filesystem::exists(out.path() / "traces" / "turn-off-light-v2-p03.jsonl"));

    auto const again = recomputeMetrics(suite, out.path() / "traces", JudgeMode::Gold, library);
    CHECK(again.rows == run.metrics.rows);
    CHECK(again.total == run.metrics.total);

    options.outDir.reset();
    options.parallel = 4;
    auto const parallel = runSuite(suite, factory, library, options);
    for (auto i = std::size_t { 0 }; i < run.traces.size(); ++i)
        CHECK(traceToJsonl(parallel.traces[i], false) == traceToJsonl(run.traces[i], false));
}

TEST_CASE("suite validation")
{
    auto doc = nlohmann::json::parse(testing::slurp(testing::dataDir() / "suites" / "conditional_light.json"));
    auto const base = testing::dataDir() / "suites";
    CHECK_NOTHROW(static_cast<void>(suiteFromJson(doc, base)));

    auto noParaphrase = doc;
    noParaphrase["tasks"][0]["paraphrases"] = nlohmann::json::array();
    CHECK_THROWS_AS(static_cast<void>(suiteFromJson(noParaphrase, base)), ConfigError);

    auto doneTooEarly = doc;
    doneTooEarly["tasks"][0]["variants"][0]["gold"][0][0] = { "Navigate(bedroom)", "Done" };
    CHECK_THROWS_AS(static_cast<void>(suiteFromJson(doneTooEarly, base)), ConfigError);

    auto badPlan = doc;
    badPlan["tasks"][0]["variants"][0]["gold"][0][1] = "Fly(away)\nDone";
    CHECK_THROWS_AS(static_cast<void>(suiteFromJson(badPlan, base)), ConfigError);

    CHECK(slugify("BRING BOOK & CUP") == "bring-book-cup");
    CHECK(judgeModeFromString("goal") == JudgeMode::Goal);
    CHECK_THROWS_AS(static_cast<void>(judgeModeFromString("vibes")), ConfigError);
}
