// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <relep/datagen.hpp>

#include "test_doctest.hpp"

using namespace relep;

namespace
{

const auto& library = defaultLibrary();

std::filesystem::path corpus()
{
    return testing::dataDir() / "corpus";
}

ScriptedGenerator fixtureGenerator()
{
    return ScriptedGenerator::fromFile(corpus() / "generator.json");
}

Triplet makeTriplet(const Store& store, std::string id, std::string sceneId, std::string planText)
{
    auto triplet = Triplet {};
    triplet.id = std::move(id);
    triplet.sceneId = std::move(sceneId);
    triplet.task = "task of " + triplet.id;
    triplet.planText = std::move(planText);
    triplet.diagnostics = validateTripletPlan(store, triplet.sceneId, triplet.planText, library, &triplet.plan);
    REQUIRE(triplet.diagnostics.empty());
    triplet.status = RecordStatus::Accepted;
    return triplet;
}

Store twoTripletStore()
{
    auto store = Store::load(corpus() / "store", library);
    store.triplets.clear();
    auto a = makeTriplet(store, "k", "kitchen", "Navigate(fridge)\nPull(fridge door, backward)\nGrasp(apple)\nDone");
    auto b = makeTriplet(store, "e", "elevator-lobby", "Navigate(elevator button)\nPush(elevator button, forward)\nDone");
    store.triplets.emplace(a.id, a);
    store.triplets.emplace(b.id, b);
    return store;
}

} // namespace

TEST_CASE("task proposals get stable ids and need an accepted scene")
{
    auto store = Store::load(corpus() / "intake", library);
    auto generator = fixtureGenerator();
    auto const ids = generateTasks(store, "kitchen", generator);
    CHECK(ids == std::vector<std::string> { "kitchen-t01", "kitchen-t02", "kitchen-t03", "kitchen-t04", "kitchen-t05" });
    CHECK(store.tasks.at("kitchen-t03").task == "Open the fridge.");
    CHECK(store.tasks.at("kitchen-t03").status == RecordStatus::Proposed);

    CHECK_THROWS_AS(generateTasks(store, "garage", generator), DataError);
    CHECK_THROWS_AS(generateTasks(store, "attic", generator), DataError);
    CHECK(store.scenes.at("kitchen").sceneText.starts_with("Robot location: living room"));
}

TEST_CASE("generated plans are validated and flagged")
{
    auto store = Store::load(corpus() / "intake", library);
    auto generator = fixtureGenerator();
    for (auto const& id: generateTasks(store, "kitchen", generator))
        generatePlan(store, id, generator, library);

    auto const& water = store.triplets.at("kitchen-t01");
    CHECK(water.diagnostics.empty());
    REQUIRE(water.plan.has_value());
    CHECK(water.plan->steps.size() == 6);
    CHECK(water.status == RecordStatus::Proposed);

    auto const& open = store.triplets.at("kitchen-t03");
    REQUIRE_FALSE(open.diagnostics.empty());
    CHECK(open.diagnostics.front().find("unknown-skill") != std::string::npos);
    CHECK_FALSE(open.plan.has_value());

    CHECK(store.triplets.at("kitchen-t04").diagnostics.front().find("forward") != std::string::npos);
    CHECK_FALSE(store.triplets.at("kitchen-t05").diagnostics.empty());

    auto const prompt = planPrompt(store.scenes.at("kitchen"), "Open the fridge.", library);
    CHECK(prompt.find("- Grasp(object)") != std::string::npos);
    CHECK(prompt.find("Task:\nOpen the fridge.") != std::string::npos);
}

TEST_CASE("review decisions gate what becomes training data")
{
    auto store = Store::load(corpus() / "intake", library);
    auto generator = fixtureGenerator();
    for (auto const& id: generateTasks(store, "kitchen", generator))
        generatePlan(store, id, generator, library);

    auto const report = reviewApply(store, nlohmann::json::parse(testing::slurp(corpus() / "decisions.json")), library);
    CHECK(report.applied == 5);
    CHECK(report.refused.empty());
    CHECK(store.triplets.at("kitchen-t01").status == RecordStatus::Accepted);
    CHECK(store.triplets.at("kitchen-t03").status == RecordStatus::Edited);
    CHECK(store.triplets.at("kitchen-t03").editNote == "use Pull instead of the unlisted Open skill");
    CHECK(store.triplets.at("kitchen-t03").diagnostics.empty());
    CHECK(store.triplets.at("kitchen-t05").status == RecordStatus::Rejected);

    auto const badEdit = nlohmann::json::parse(
        R"json([ { "target": "kitchen-t02", "action": "edit", "new_plan": "Grasp(apple)\nGrasp(water bottle)\nGrasp(sofa)\nDone" } ])json");
    auto const refused = reviewApply(store, badEdit, library);
    REQUIRE(refused.refused.size() == 1);
    CHECK(refused.refused.front().starts_with("kitchen-t02: "));
    CHECK(store.triplets.at("kitchen-t02").status == RecordStatus::Rejected);

    auto const before = store.triplets.at("kitchen-t01").status;
    auto const dangling = nlohmann::json::parse(
        R"json([ { "target": "kitchen-t01", "action": "reject" }, { "target": "kitchen-t99", "action": "accept" } ])json");
    try
    {
        static_cast<void>(reviewApply(store, dangling, library));
        FAIL("expected a dangling id error");
    }
    catch (const DataError& e)
    {
        CHECK(std::string(e.what()).find("kitchen-t99") != std::string::npos);
    }
    CHECK(store.triplets.at("kitchen-t01").status == before);
    CHECK_THROWS_AS(static_cast<void>(reviewApply(store, nlohmann::json::parse(R"([ { "target": "kitchen-t01", "action": "maybe" } ])"), library)),
                    DataError);
}

TEST_CASE("stores survive a save and reload")
{
    auto store = Store::load(corpus() / "store", library);
    testing::TempDir dir;
    store.save(dir.path());
    auto const again = Store::load(dir.path(), library);
    CHECK(again.scenes.size() == store.scenes.size());
    CHECK(again.triplets.size() == store.triplets.size());
    CHECK(again.scenes.at("kitchen").sceneFile == store.scenes.at("kitchen").sceneFile);
    CHECK(again.triplets.at("bathroom-t01").editNote == store.triplets.at("bathroom-t01").editNote);
    CHECK(renderDialogues(expandStore(again, library)) == renderDialogues(expandStore(store, library)));
}

TEST_CASE("sequential expansion emits one example per prefix")
{
    auto const store = twoTripletStore();
    auto counts = ExpansionCounts {};
    auto const examples = expandStore(store, library, &counts);
    CHECK(examples.size() == 7);
    CHECK(counts.initial == 2);
    CHECK(counts.sequential == 5);
    CHECK(counts.totalSteps == 5);

    auto const kitchen = expandSequential(store, store.triplets.at("k"), library);
    REQUIRE(kitchen.size() == 4);
    CHECK(kitchen[0].target == "Navigate(fridge)\nPull(fridge door, backward)\nGrasp(apple)\nDone");
    CHECK(kitchen[2].target == "Grasp(apple)\nDone");
    CHECK(kitchen[3].target == "Done");
    CHECK(kitchen[2].prompt.memoryText.find("Finished Steps:\n1. Navigate(fridge)\n2. Pull(fridge door, backward)\n") != std::string::npos);
    CHECK(kitchen[2].prompt.observation.sceneText.find("- apple (in fridge)") != std::string::npos);
    CHECK(kitchen[3].prompt.memory.status.hands[0] == "apple");
    CHECK(kitchen[1].id == "k-r01");
    CHECK(kitchen[1].toJson().at("round") == "sequential");
    CHECK(kitchen[0].toJson().at("round") == "initial");
}

TEST_CASE("a gold plan that fails in simulation cannot be expanded")
{
    auto store = twoTripletStore();
    auto broken = makeTriplet(store, "x", "kitchen", "Navigate(fridge)\nGrasp(apple)\nDone");
    store.triplets.emplace(broken.id, broken);
    CHECK_THROWS_AS(static_cast<void>(expandStore(store, library)), DataError);
}

TEST_CASE("export is byte stable")
{
    auto const store = Store::load(corpus() / "store", library);
    testing::TempDir dir;
    auto const path = dir.path() / "dialogues.jsonl";
    auto const first = exportDialogues(store, library, path);
    CHECK(first.changed);
    auto const bytes = testing::slurp(path);
    auto const second = exportDialogues(store, library, path);
    CHECK_FALSE(second.changed);
    CHECK(second.records == first.records);
    CHECK(testing::slurp(path) == bytes);
    CHECK(static_cast<std::size_t>(std::count(bytes.begin(), bytes.end(), '\n')) == first.records);
}
