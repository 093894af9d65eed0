// SPDX-License-Identifier: Apache-2.0
#include <relep/memory.hpp>
#include <relep/text.hpp>

#include <fmt/format.h>

namespace relep
{

RobotStatus statusFromWorld(const WorldState& world)
{
    return RobotStatus { .zone = world.robotZone, .hands = world.robotHands };
}

MemoryState freshMemory(const WorldState& world)
{
    auto memory = MemoryState {};
    memory.status = statusFromWorld(world);
    return memory;
}

MemoryState recordPlan(MemoryState memory, Plan plan)
{
    memory.previousPlan = std::move(plan);
    return memory;
}

MemoryState recordStep(MemoryState memory, const SkillCall& call, const SkillOutcome& outcome, RobotStatus newStatus)
{
    memory.status = std::move(newStatus);
    if (!outcome.success)
        return memory;

    memory.lastFailure.reset();
    memory.finishedSteps.push_back(call);
    auto const step = memory.finishedSteps.size();
    if (iequals(call.skill, "Detect") && !call.args.empty())
        memory.detections.push_back(Detection { .object = call.args[0], .step = step });
    if ((iequals(call.skill, "Speak") || iequals(call.skill, "EQA")) && outcome.utterance)
        memory.utterances.push_back(Utterance { .skill = call.skill, .text = *outcome.utterance, .step = step });
    return memory;
}

std::string formatFailureNotice(const FailureNotice& notice)
{
    return fmt::format("FAILED: {}: {}", renderCall(notice.call), toString(notice.reason));
}

std::string renderStatus(const RobotStatus& status)
{
    auto out = fmt::format("Location: {}\n", status.zone.empty() ? "unknown" : status.zone);
    if (status.hands.empty())
        return out + "Hands: none (no arms)";
    auto hands = std::vector<std::string> {};
    for (auto i = std::size_t { 0 }; i < status.hands.size(); ++i)
    {
        auto const& held = status.hands[i];
        hands.push_back(held ? fmt::format("hand {} holding {}", i + 1, *held) : fmt::format("hand {} free", i + 1));
    }
    return out + "Hands: " + join(hands, ", ");
}

std::string renderMemoryPrompt(const MemoryState& memory)
{
    auto out = std::string("Previous Plan:\n");
    out += memory.previousPlan ? renderPlan(*memory.previousPlan) : std::string("none");

    out += "\nFinished Steps:\n";
    if (memory.finishedSteps.empty())
        out += "none";
    for (auto i = std::size_t { 0 }; i < memory.finishedSteps.size(); ++i)
    {
        if (i > 0)
            out += '\n';
        out += fmt::format("{}. {}", i + 1, renderCall(memory.finishedSteps[i]));
    }

    out += "\nRobot Status:\n";
    out += renderStatus(memory.status);
    if (memory.lastFailure)
        out += "\n" + formatFailureNotice(*memory.lastFailure);

    out += "\n";
    out += NoReplanDirective;
    return out;
}

} // namespace relep
