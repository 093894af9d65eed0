// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relep/memory.hpp>
#include <relep/planner.hpp>
#include <relep/skill_library.hpp>
#include <relep/world_sim.hpp>

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace relep
{

inline constexpr std::size_t DefaultMaxRounds = 32;

struct EpisodeSpec
{
    std::string id;
    std::string task;
    std::filesystem::path scene;
    std::string config = "humanoid";
    std::optional<GoldScript> script;
    std::size_t maxRounds = DefaultMaxRounds;
};

/// Throws ConfigError when max_rounds is zero or the task/scene is missing.
void validateEpisode(const EpisodeSpec& spec);

enum class VerdictKind
{
    Completed,
    Failed,
    ExhaustedRounds,
};

[[nodiscard]] std::string_view toString(VerdictKind kind) noexcept;

struct Verdict
{
    VerdictKind kind = VerdictKind::ExhaustedRounds;
    std::string reason; // "unparseable", "backend: ..." for failures

    bool operator==(const Verdict&) const = default;
};

struct RoundRecord
{
    std::size_t round = 0;
    std::string requestDigest;
    std::string rawText;
    bool retried = false;
    std::vector<ParseDiagnostic> diagnostics; // of the final attempt
    std::optional<Plan> plan;
    std::optional<SkillCall> executed;
    std::optional<SkillOutcome> outcome;
    std::string observationDigest;
    std::int64_t latencyMs = 0;
};

struct EpisodeTrace
{
    std::string episodeId;
    std::string task;
    std::string scene;
    std::string config;
    std::vector<RoundRecord> rounds;
    Verdict verdict;

    [[nodiscard]] std::size_t executedSteps() const;
    [[nodiscard]] std::size_t successfulSteps() const;
};

struct ExecutorOptions
{
    std::size_t transportRetries = 2;
};

struct EpisodeRun
{
    EpisodeTrace trace;
    WorldState finalWorld;
    MemoryState finalMemory;
};

/// The plan-execute-observe loop. Each round observes the world, asks the backend for a plan,
/// executes at most its first step and records the result. A bare Done ends the episode; a bare
/// Pending consumes the round without acting.
[[nodiscard]] EpisodeRun runEpisode(const EpisodeSpec& spec,
                                    Backend& backend,
                                    const SkillLibrary& library,
                                    const RobotConfig& config,
                                    const WorldState& initialWorld,
                                    const EqaAnswerer& answerer,
                                    const ExecutorOptions& options = {});

/// Convenience overload loading the scene file and resolving the config by name.
[[nodiscard]] EpisodeRun runEpisode(const EpisodeSpec& spec,
                                    Backend& backend,
                                    const SkillLibrary& library,
                                    const ExecutorOptions& options = {});

/// Returns the memory the next request should see: with a failure notice when the last
/// executed step failed, unchanged otherwise. Only the newest notice is kept.
[[nodiscard]] MemoryState replanOnFailure(const RoundRecord& last, MemoryState memory);

// Trace files: one JSON object per line: an episode header, one record per round, a verdict.
[[nodiscard]] std::string traceToJsonl(const EpisodeTrace& trace, bool includeLatency = true);
[[nodiscard]] EpisodeTrace traceFromJsonl(std::string_view text, const SkillLibrary& library);
void writeTraceFile(const std::filesystem::path& path, const EpisodeTrace& trace);
[[nodiscard]] EpisodeTrace readTraceFile(const std::filesystem::path& path, const SkillLibrary& library);

} // namespace relep
