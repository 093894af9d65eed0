// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <relep/world_sim.hpp>

#include "test_doctest.hpp"
#include <nlohmann/json.hpp>

using namespace relep;

namespace
{

SkillCall call(std::string skill, std::vector<std::string> args)
{
    return SkillCall { std::move(skill), std::move(args) };
}

WorldState kitchen()
{
    return loadSceneFile(testing::scenePath("kitchen"));
}

// Applies calls in order and requires each to succeed.
WorldState run(WorldState world, const std::vector<SkillCall>& calls)
{
    for (auto const& c: calls)
    {
        auto result = applySkill(world, c);
        INFO(renderCall(c), ": ", result.outcome.worldDelta);
        REQUIRE(result.outcome.success);
        world = std::move(result.world);
    }
    return world;
}

} // namespace

TEST_CASE("bundled scenes load and validate")
{
    for (auto const& entry: std::filesystem::directory_iterator(testing::dataDir() / "scenes"))
    {
        INFO(entry.path().string());
        CHECK_NOTHROW(static_cast<void>(loadSceneFile(entry.path())));
    }
}

TEST_CASE("navigate accepts zones and objects")
{
    auto const world = kitchen();
    CHECK(applySkill(world, call("Navigate", { "kitchen" })).world.robotZone == "kitchen");
    CHECK(applySkill(world, call("Navigate", { "the fridge" })).world.robotZone == "kitchen");
    auto const lost = applySkill(world, call("Navigate", { "garage" }));
    CHECK(lost.outcome.failureReason == FailureReason::UnknownDestination);
    CHECK(lost.world == world);
}

TEST_CASE("closed fridge hides the bottle until the door is pulled")
{
    auto world = run(kitchen(), { call("Navigate", { "fridge" }) });

    auto const blind = applySkill(world, call("Grasp", { "water bottle" }));
    CHECK(blind.outcome.failureReason == FailureReason::NotVisible);
    CHECK(applySkill(world, call("Detect", { "water bottle" })).outcome.failureReason == FailureReason::NotVisible);

    world = run(world, { call("Pull", { "fridge door", "backward" }) });
    CHECK(world.objects.at("fridge").states.contains("open"));
    CHECK_FALSE(world.objects.at("fridge").states.contains("closed"));

    world = run(world, { call("Grasp", { "water bottle" }), call("Push", { "fridge door", "forward" }) });
    CHECK(world.objects.at("fridge").states.contains("closed"));
    CHECK(world.robotHands[0] == "water bottle");

    world = run(world, { call("Navigate", { "user" }), call("Put", { "water bottle", "user", "front" }) });
    auto const& bottle = world.objects.at("water bottle").location;
    CHECK(bottle.kind == LocationKind::Zone);
    CHECK(bottle.support == "user");
    CHECK(bottle.ref == "living room");
    CHECK(world.robotHands[0] == std::nullopt);
}

TEST_CASE("grasp preconditions")
{
    auto world = kitchen();
    CHECK(applySkill(world, call("Grasp", { "sofa" })).outcome.failureReason == FailureReason::NotGraspable);
    CHECK(applySkill(world, call("Grasp", { "unicorn" })).outcome.failureReason == FailureReason::UnknownObject);
    CHECK(applySkill(world, call("Grasp", { "counter" })).outcome.failureReason == FailureReason::NotInZone);

    world = run(world, { call("Navigate", { "fridge" }), call("Pull", { "fridge door", "backward" }),
                         call("Grasp", { "water bottle" }), call("Grasp", { "apple" }) });
    CHECK(world.robotHands[1] == "apple");
    CHECK(applySkill(world, call("Grasp", { "apple" })).outcome.failureReason == FailureReason::NotGraspable);
}

TEST_CASE("no free hand with a single arm")
{
    auto doc = nlohmann::json::parse(testing::slurp(testing::scenePath("apartment")));
    doc["robot"]["arm_count"] = 1;
    auto world = run(loadScene(doc), { call("Navigate", { "dining table" }), call("Grasp", { "cup" }) });
    auto const second = applySkill(world, call("Grasp", { "plate" }));
    CHECK(second.outcome.failureReason == FailureReason::NoFreeHand);
    CHECK(second.world == world);
}

TEST_CASE("put needs a held object and a reachable place")
{
    auto world = loadSceneFile(testing::scenePath("trash_corner"));
    CHECK(applySkill(world, call("Put", { "paper ball", "trash can", "inside" })).outcome.failureReason
          == FailureReason::NotHolding);
    world = run(world, { call("Navigate", { "paper ball" }), call("Grasp", { "paper ball" }) });
    CHECK(applySkill(world, call("Put", { "paper ball", "trash can", "inside" })).outcome.failureReason
          == FailureReason::NotInZone);
    world = run(world, { call("Navigate", { "trash can" }), call("Put", { "paper ball", "trash can", "inside" }) });
    CHECK(world.objects.at("paper ball").location == Location { LocationKind::Container, "trash can", 0, {}, std::string("inside") });
    CHECK(contentsOf(world, "trash can") == std::vector<std::string> { "paper ball" });
}

TEST_CASE("put into a closed container fails")
{
    auto world = run(kitchen(), { call("Navigate", { "fridge" }), call("Pull", { "fridge door", "backward" }),
                                  call("Grasp", { "apple" }), call("Push", { "fridge door", "forward" }) });
    auto const result = applySkill(world, call("Put", { "apple", "fridge", "inside" }));
    CHECK(result.outcome.failureReason == FailureReason::NotVisible);
    world = run(world, { call("Put", { "apple", "kitchen", "floor" }) });
    CHECK(world.objects.at("apple").location.ref == "kitchen");
}

TEST_CASE("articulation respects directions")
{
    auto world = run(loadSceneFile(testing::scenePath("dining_room")), { call("Navigate", { "chair" }) });
    CHECK(applySkill(world, call("Push", { "chair", "left" })).outcome.failureReason
          == FailureReason::NotArticulableInDirection);
    world = run(world, { call("Push", { "chair", "forward" }) });
    CHECK(world.objects.at("chair").pose == "tucked under the table");
    CHECK(applySkill(world, call("Push", { "dining table", "forward" })).outcome.failureReason
          == FailureReason::NotArticulableInDirection);
}

TEST_CASE("wait, speak and eqa")
{
    auto const world = kitchen();
    auto const waited = applySkill(world, call("Wait", { "5" }));
    CHECK(waited.world.clock == 5);
    auto const spoken = applySkill(world, call("Speak", { "hello" }));
    CHECK(spoken.outcome.utterance == "hello");
    CHECK(spoken.world == world);
    auto const answered = applySkill(world, call("EQA", { "what is here" }), [](std::string_view q) {
        return "asked: " + std::string(q);
    });
    CHECK(answered.outcome.utterance == "asked: what is here");
}

TEST_CASE("observation text")
{
    auto world = kitchen();
    auto const first = observe(world, 0);
    CHECK(first.sceneText
          == "Robot location: living room\n"
             "Zones: living room, kitchen\n"
             "Visible objects:\n"
             "- sofa\n"
             "- user\n"
             "Holding: hand 1: empty; hand 2: empty");
    world = run(world, { call("Navigate", { "fridge" }), call("Pull", { "fridge door", "backward" }) });
    auto const inside = observe(world, 2).sceneText;
    CHECK(inside.find("- water bottle (in fridge)") != std::string::npos);
    CHECK(inside.find("- fridge (open)") != std::string::npos);
}

TEST_CASE("scene validation")
{
    auto base = nlohmann::json::parse(testing::slurp(testing::scenePath("kitchen")));

    auto twoPlaces = base;
    twoPlaces["objects"][2]["contents"] = { "sofa" };
    CHECK_THROWS_AS(static_cast<void>(loadScene(twoPlaces)), SceneError);

    auto dangling = base;
    dangling["objects"][4]["location"] = { { "container", "cupboard" } };
    CHECK_THROWS_AS(static_cast<void>(loadScene(dangling)), SceneError);

    auto both = base;
    both["objects"][2]["states"] = { "open", "closed" };
    CHECK_THROWS_AS(static_cast<void>(loadScene(both)), SceneError);

    auto badDirection = base;
    badDirection["objects"][3]["articulation"]["sideways"] = "open";
    CHECK_THROWS_AS(static_cast<void>(loadScene(badDirection)), SceneError);

    auto noZone = base;
    noZone["robot"]["zone"] = "attic";
    CHECK_THROWS_AS(static_cast<void>(loadScene(noZone)), SceneError);
}

TEST_CASE("scene json round trip")
{
    auto const world = kitchen();
    CHECK(loadScene(sceneToJson(world)) == world);
}
