// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include <relep/digest.hpp>
#include <relep/planner.hpp>

#include "test_doctest.hpp"

using namespace relep;

namespace
{

const auto& library = defaultLibrary();

PlannerRequest requestFor(const WorldState& world, const MemoryState& memory, std::size_t round = 0)
{
    return assembleRequest("Bring me a bottle of water.", observe(world, round), memory, library, humanoidConfig(), round);
}

GoldScript waterScript()
{
    return goldScriptFromJson(nlohmann::json::parse(R"json({
        "rules": [
            { "when": { "failure": true, "failed_skill": "Grasp" },
              "plan": ["Pull(fridge door, backward)", "Grasp(water bottle)", "Done"] },
            { "when": { "finished": 0 },
              "plan": ["Navigate(fridge)", "Grasp(water bottle)", "Done"] }
        ],
        "eqa": [ { "match": "mirror", "answer": "I am {self}." } ]
    })json"));
}

} // namespace

TEST_CASE("digests and encodings")
{
    CHECK(sha256Hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256Hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(base64Encode("Man") == "TWFu");
    CHECK(base64Encode("Ma") == "TWE=");
    CHECK(base64Encode("") == "");
}

TEST_CASE("request sections and digest")
{
    auto const world = loadSceneFile(testing::scenePath("kitchen"));
    auto const request = requestFor(world, freshMemory(world));
    auto const prompt = request.promptText();
    CHECK(prompt.starts_with("Robot Configuration:\nA humanoid robot"));
    auto const library = prompt.find("Skill Library:");
    auto const memory = prompt.find("Previous Plan:");
    auto const task = prompt.find("Task:\nBring me a bottle of water.");
    auto const observation = prompt.find("Observation:\nRobot location: living room");
    CHECK(library < memory);
    CHECK(memory < task);
    CHECK(task < observation);
    CHECK(observation != std::string::npos);

    CHECK(request.digest() == sha256Hex(request.bodyText()));
    CHECK(request.body().at("sections").at("observation") == request.observation.sceneText);
    CHECK_FALSE(request.body().contains("image_base64"));
    CHECK(requestFor(world, freshMemory(world)).digest() == request.digest());
}

TEST_CASE("diagnostics are appended for the retry")
{
    auto const world = loadSceneFile(testing::scenePath("kitchen"));
    auto const request = requestFor(world, freshMemory(world));
    auto const parsed = parsePlan("Open(fridge)\nDone", library);
    auto const retry = withDiagnostics(request, parsed.diagnostics());
    CHECK(retry.memoryText.starts_with(request.memoryText));
    CHECK(retry.memoryText.find("line 1: unknown-skill") != std::string::npos);
    CHECK(retry.digest() != request.digest());
}

TEST_CASE("oracle replays the suffix while steps succeed")
{
    auto const world = loadSceneFile(testing::scenePath("kitchen"));
    auto oracle = ScriptedOracle(waterScript());
    auto memory = freshMemory(world);
    auto const first = oracle.complete(requestFor(world, memory));
    CHECK(first == "Navigate(fridge)\nGrasp(water bottle)\nDone");

    memory = recordPlan(memory, parsePlan(first, library).plan());
    memory.finishedSteps.push_back(SkillCall { "Navigate", { "fridge" } });
    CHECK(oracle.complete(requestFor(world, memory, 1)) == "Grasp(water bottle)\nDone");

    memory.lastFailure = FailureNotice { SkillCall { "Grasp", { "water bottle" } }, FailureReason::NotVisible };
    memory = recordPlan(memory, parsePlan("Grasp(water bottle)\nDone", library).plan());
    CHECK(oracle.complete(requestFor(world, memory, 2)) == "Pull(fridge door, backward)\nGrasp(water bottle)\nDone");
}

TEST_CASE("oracle script gaps raise a backend error")
{
    auto const world = loadSceneFile(testing::scenePath("kitchen"));
    auto oracle = ScriptedOracle(GoldScript {});
    try
    {
        static_cast<void>(oracle.complete(requestFor(world, freshMemory(world))));
        FAIL("expected a script gap");
    }
    catch (const BackendError& e)
    {
        CHECK(e.kind() == BackendErrorKind::ScriptGap);
    }
}

TEST_CASE("amnesic wrapper wipes memory but keeps the robot status")
{
    auto const world = loadSceneFile(testing::scenePath("kitchen"));
    auto memory = recordPlan(freshMemory(world), parsePlan("Grasp(cup)\nDone", library).plan());
    memory.finishedSteps.push_back(SkillCall { "Navigate", { "fridge" } });
    memory.lastFailure = FailureNotice { SkillCall { "Grasp", { "cup" } }, FailureReason::NotVisible };
    memory.status.zone = "kitchen";
    auto const blank = AmnesicBackend::forget(requestFor(world, memory));
    CHECK_FALSE(blank.memory.previousPlan.has_value());
    CHECK(blank.memory.finishedSteps.empty());
    CHECK_FALSE(blank.memory.lastFailure.has_value());
    CHECK(blank.memory.status.zone == "kitchen");
    CHECK(blank.memoryText.find("Previous Plan:\nnone") == 0);
    CHECK(blank.memoryText.find("FAILED") == std::string::npos);

    auto amnesic = AmnesicBackend(std::make_shared<ScriptedOracle>(waterScript()));
    CHECK(amnesic.complete(requestFor(world, memory)) == "Navigate(fridge)\nGrasp(water bottle)\nDone");
}

TEST_CASE("record then replay returns the same text; misses are errors")
{
    testing::TempDir dir;
    auto const world = loadSceneFile(testing::scenePath("kitchen"));
    auto const request = requestFor(world, freshMemory(world));
    auto recorder = RecordingBackend(std::make_shared<ScriptedOracle>(waterScript()), ReplayCache(dir.path()));
    auto const recorded = recorder.complete(request);

    auto replay = ReplayBackend(ReplayCache(dir.path()));
    CHECK(replay.complete(request) == recorded);
    CHECK(std::filesystem::exists(ReplayCache(dir.path()).pathFor(request.digest())));

    auto other = request;
    other.task = "Something else.";
    try
    {
        static_cast<void>(replay.complete(other));
        FAIL("expected a cache miss");
    }
    catch (const BackendError& e)
    {
        CHECK(e.kind() == BackendErrorKind::CacheMiss);
    }
}

TEST_CASE("eqa answers are assembled from memory and config")
{
    auto const world = loadSceneFile(testing::scenePath("bathroom"));
    auto memory = freshMemory(world);
    memory.finishedSteps.push_back(SkillCall { "Navigate", { "mirror" } });
    auto const answerer = ScriptedAnswerer(waterScript().eqa);
    auto const answer = answerEqa("what is in the MIRROR", memory, observe(world, 1), "Look.", humanoidConfig(), answerer);
    CHECK(answer == "I am a humanoid robot with two arms and a mobile base.");

    auto const fallback = ScriptedAnswerer().answer(buildEqaContext("who are you", memory, observe(world, 1), "Look.", quadrupedConfig()));
    CHECK(fallback
          == "Question: who are you. I am a quadruped robot dog with no robot arm. "
             "Steps performed: 1. Navigate(mirror). Visible now: bed.");
}

TEST_CASE("templates keep unknown placeholders")
{
    auto const context = EqaContext { .task = "t", .query = "q", .selfDescription = "A robot.", .finishedSteps = {},
                                      .detections = {}, .utterances = {}, .sceneText = "" };
    CHECK(fillTemplate("{query} {nope} {steps}", context) == "q {nope} no steps have been performed yet");
}

TEST_CASE("gold scripts round-trip through json")
{
    auto const script = waterScript();
    auto const again = goldScriptFromJson(goldScriptToJson(script));
    REQUIRE(again.rules.size() == 2);
    CHECK(again.rules[0].when.failedSkill == "Grasp");
    CHECK(again.rules[1].plan == script.rules[1].plan);
    CHECK(again.eqa.size() == 1);
}
