// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relep/plan_dsl.hpp>
#include <relep/world_sim.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace relep
{

inline constexpr std::string_view NoReplanDirective = "Do not re-plan unless the original plan will fail.";

struct RobotStatus
{
    std::string zone;
    std::vector<std::optional<std::string>> hands;

    bool operator==(const RobotStatus&) const = default;
};

struct Detection
{
    std::string object;
    std::size_t step = 0; // 1-based position in finished steps

    bool operator==(const Detection&) const = default;
};

struct Utterance
{
    std::string skill; // Speak or EQA
    std::string text;
    std::size_t step = 0;

    bool operator==(const Utterance&) const = default;
};

struct FailureNotice
{
    SkillCall call;
    FailureReason reason = FailureReason::NotVisible;

    bool operator==(const FailureNotice&) const = default;
};

/// Planner-facing memory. Holds only the most recent plan, the successful steps so far,
/// what was detected or said, the robot status and at most one failure notice.
struct MemoryState
{
    std::optional<Plan> previousPlan;
    std::vector<SkillCall> finishedSteps;
    std::vector<Detection> detections;
    std::vector<Utterance> utterances;
    RobotStatus status;
    std::optional<FailureNotice> lastFailure;

    bool operator==(const MemoryState&) const = default;
};

[[nodiscard]] RobotStatus statusFromWorld(const WorldState& world);
[[nodiscard]] MemoryState freshMemory(const WorldState& world);

/// Replaces the previous plan; older plans are dropped.
[[nodiscard]] MemoryState recordPlan(MemoryState memory, Plan plan);

/// Successful steps extend the finished list (and detections/utterances) and clear any
/// failure notice. Failed steps only replace the status; the executor attaches the notice.
[[nodiscard]] MemoryState recordStep(MemoryState memory,
                                     const SkillCall& call,
                                     const SkillOutcome& outcome,
                                     RobotStatus newStatus);

[[nodiscard]] std::string formatFailureNotice(const FailureNotice& notice);
[[nodiscard]] std::string renderStatus(const RobotStatus& status);
[[nodiscard]] std::string renderMemoryPrompt(const MemoryState& memory);

} // namespace relep
