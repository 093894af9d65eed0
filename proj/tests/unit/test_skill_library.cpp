// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <relep/skill_library.hpp>

#include "test_doctest.hpp"

using namespace relep;

namespace
{

Plan plan(std::string_view text)
{
    auto result = parsePlan(text, defaultLibrary());
    REQUIRE(result.ok());
    return result.plan();
}

} // namespace

TEST_CASE("default library holds the nine skills with five interactive ones")
{
    auto const& library = defaultLibrary();
    CHECK(library.size() == 9);
    CHECK(library.interactiveCount() == 5);
    for (auto const* name: { "Grasp", "Navigate", "Pull", "Push", "Put" })
        CHECK(library.find(name)->interactive);
    for (auto const* name: { "Detect", "Speak", "EQA", "Wait" })
        CHECK_FALSE(library.find(name)->interactive);
    CHECK(library.find("put")->signature() == "Put(object, place, side)");
    CHECK(library.find("Pull")->acceptsDirection("backward"));
    CHECK_FALSE(library.find("Pull")->acceptsDirection("forward"));
    CHECK(library.find("Push")->acceptsDirection("forward"));
    CHECK(library.find("Open") == nullptr);
}

TEST_CASE("library construction rejects inconsistent specs")
{
    auto dup = std::vector<SkillSpec> { defaultLibrary().specs()[0], defaultLibrary().specs()[0] };
    CHECK_THROWS_AS(SkillLibrary { dup }, ConfigError);

    auto pull = *defaultLibrary().find("Pull");
    pull.directionDomain.reset();
    CHECK_THROWS_AS(SkillLibrary { { pull } }, ConfigError);
}

TEST_CASE("bundled configurations")
{
    auto const quadruped = quadrupedConfig();
    CHECK(quadruped.armCount == 0);
    CHECK_FALSE(quadruped.hasSkill("Grasp"));
    CHECK_FALSE(quadruped.hasSkill("Put"));
    CHECK(quadruped.hasSkill("Push"));
    for (auto const& config: bundledConfigs())
        CHECK_NOTHROW(validateConfig(config, defaultLibrary()));
}

TEST_CASE("config files round-trip and are validated")
{
    auto const fixed = resolveConfig("fixed_arm.json", defaultLibrary(), testing::dataDir() / "configs");
    CHECK(fixed.name == "fixed_arm");
    CHECK_FALSE(fixed.mobile);
    CHECK(configFromJson(configToJson(fixed), defaultLibrary()) == fixed);

    auto broken = configToJson(quadrupedConfig());
    broken["available_skills"].push_back("Grasp");
    CHECK_THROWS_AS(static_cast<void>(configFromJson(broken, defaultLibrary())), ConfigError);

    auto unknown = configToJson(humanoidConfig());
    unknown["available_skills"].push_back("Fly");
    CHECK_THROWS_AS(static_cast<void>(configFromJson(unknown, defaultLibrary())), ConfigError);

    CHECK_THROWS_AS(static_cast<void>(resolveConfig("octopus", defaultLibrary())), ConfigError);
}

TEST_CASE("single arm cannot grasp twice in a row")
{
    auto const twoGrasps = plan("Navigate(table)\nGrasp(book)\nGrasp(cup)\nDone");
    auto const violations = checkLegality(twoGrasps, singleArmConfig(), 1);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].step == 3);
    CHECK(violations[0].kind == ViolationKind::NoFreeHand);
    CHECK(checkLegality(twoGrasps, humanoidConfig(), 2).empty());
}

TEST_CASE("legality tracks puts and skill availability")
{
    auto const handOver = plan("Grasp(book)\nPut(book, table, left)\nGrasp(cup)\nDone");
    CHECK(checkLegality(handOver, singleArmConfig(), 1).empty());

    auto const dog = checkLegality(handOver, quadrupedConfig(), 0);
    REQUIRE(dog.size() == 3);
    CHECK(dog[0].kind == ViolationKind::SkillUnavailable);

    auto const putFirst = plan("Put(book, table, left)\nDone");
    CHECK(checkLegality(putFirst, humanoidConfig(), 2).front().kind == ViolationKind::NothingHeld);
    CHECK(checkLegality(putFirst, humanoidConfig(), 1).empty()); // the occupied hand holds something unnamed

    auto const regrasp = plan("Grasp(book)\nGrasp(book)\nDone");
    CHECK(checkLegality(regrasp, humanoidConfig(), 2).front().kind == ViolationKind::AlreadyHeld);

    auto const wrongPut = plan("Grasp(book)\nPut(cup, table, left)\nDone");
    CHECK(checkLegality(wrongPut, humanoidConfig(), 2).front().kind == ViolationKind::NotHeld);

    CHECK_THROWS_AS(static_cast<void>(checkLegality(handOver, singleArmConfig(), 2)), std::invalid_argument);
}

TEST_CASE("legality from known hand contents")
{
    auto const hands = std::vector<std::optional<std::string>> { std::string("cup"), std::nullopt };
    auto const putCup = plan("Put(cup, table, left)\nGrasp(book)\nGrasp(pen)\nDone");
    auto const violations = checkLegality(putCup, humanoidConfig(), hands);
    CHECK(violations.empty());
}

TEST_CASE("prompt sections")
{
    auto const text = renderLibraryPrompt(defaultLibrary(), quadrupedConfig());
    CHECK(text.starts_with("Skill Library:\n"));
    CHECK(text.find("- Pull(object, direction): Pull object in one of the following directions:up, down, left, right, backward.")
          != std::string::npos);
    CHECK(text.find("Grasp(") == std::string::npos);
    CHECK(text.find("Robot Configuration:\nA quadruped robot dog with no robot arm.") != std::string::npos);
}
