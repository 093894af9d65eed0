// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relep/executor.hpp>
#include <relep/planner.hpp>
#include <relep/skill_library.hpp>
#include <relep/world_sim.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace relep
{

enum class JudgeMode
{
    Gold,
    Goal,
};

[[nodiscard]] std::string_view toString(JudgeMode mode) noexcept;
[[nodiscard]] JudgeMode judgeModeFromString(std::string_view text);

// --- goal predicates ---------------------------------------------------------

enum class GoalKind
{
    State,             // object carries the state
    Pose,              // object pose label equals the value
    Held,              // object is in a robot hand
    On,                // object rests on the support (and side, when given)
    Inside,            // object is in the container
    InZone,            // object is effectively in the zone
    RobotZone,         // robot stands in the zone
    UtteranceContains, // some Speak/EQA utterance contains the value (case-insensitive)
};

struct GoalCondition
{
    GoalKind kind = GoalKind::State;
    std::string object;
    std::string value;
    std::optional<std::string> side;
};

/// Disjunction of conjunctions. An empty predicate never holds.
struct GoalPredicate
{
    std::vector<std::vector<GoalCondition>> anyOf;

    [[nodiscard]] bool holds(const WorldState& world, const std::vector<std::string>& utterances) const;
};

[[nodiscard]] GoalPredicate goalFromJson(const nlohmann::json& document);
[[nodiscard]] nlohmann::json goalToJson(const GoalPredicate& goal);

// --- judging -----------------------------------------------------------------

/// One acceptable gold plan, split at Pending boundaries. Every segment but the last ends Pending.
struct GoldVariant
{
    std::vector<Plan> segments;

    [[nodiscard]] std::vector<SkillCall> steps() const;
};

struct JudgeContext
{
    JudgeMode mode = JudgeMode::Gold;
    std::string task;
    std::vector<GoldVariant> gold;
    GoalPredicate goal;
    WorldState initialWorld;
    RobotConfig config;
    std::vector<EqaTemplate> eqa;
};

struct StepCount
{
    std::uint64_t correct = 0;
    std::uint64_t attempted = 0;
};

[[nodiscard]] bool judgeInitialPlan(const EpisodeTrace& trace, const JudgeContext& judge);
[[nodiscard]] StepCount judgeSteps(const EpisodeTrace& trace, const JudgeContext& judge);
[[nodiscard]] bool judgeSuccess(const EpisodeTrace& trace, const JudgeContext& judge);

/// Goal-mode test of one plan: every step succeeds from `world`, and a Done plan ends with the goal
/// holding. A Pending plan only has to execute cleanly.
[[nodiscard]] bool planReachesGoal(const Plan& plan,
                                   const WorldState& world,
                                   const MemoryState& memory,
                                   const JudgeContext& judge);

/// Re-executes the trace's executed steps from the initial world. Recorded EQA answers are reused.
struct Replay
{
    WorldState world;
    MemoryState memory;
    std::vector<std::string> utterances;
};

[[nodiscard]] Replay replayTrace(const EpisodeTrace& trace, const WorldState& initialWorld);

// --- metrics -----------------------------------------------------------------

struct Ratio
{
    std::uint64_t num = 0;
    std::uint64_t den = 0;

    Ratio& operator+=(const Ratio& other)
    {
        num += other.num;
        den += other.den;
        return *this;
    }
    bool operator==(const Ratio&) const = default;
};

/// Percentage to one decimal, from exact integers, ties to even; "-" for an empty ratio.
[[nodiscard]] std::string formatPercent(const Ratio& ratio);

struct TaskMetrics
{
    std::string task;
    Ratio ipsr;
    Ratio ssr;
    Ratio sr;
    bool inferred = false; // row not listed in the source table, reconstructed from its totals

    bool operator==(const TaskMetrics&) const = default;
};

struct MetricsTable
{
    std::vector<TaskMetrics> rows;
    TaskMetrics total;
};

/// Merges rows of the same task (in first-seen order) and totals them as a ratio of sums.
[[nodiscard]] MetricsTable aggregate(const std::vector<TaskMetrics>& rows, bool includeInferred = true);

[[nodiscard]] std::string renderMetricsTable(const MetricsTable& table);
[[nodiscard]] nlohmann::json metricsToJson(const MetricsTable& table);
[[nodiscard]] MetricsTable metricsFromJson(const nlohmann::json& document);

/// Baseline rows shipped as data: {"methods": {name: [{task, ipsr, ssr, sr, inferred?}]}}.
[[nodiscard]] std::vector<TaskMetrics> loadBaselineRows(const std::filesystem::path& path, const std::string& method);

// --- suites ------------------------------------------------------------------

struct SuiteEpisode
{
    EpisodeSpec spec;
    std::size_t taskIndex = 0;
    std::size_t variantIndex = 0;
};

struct SuiteVariant
{
    std::filesystem::path scene;
    std::vector<GoldVariant> gold;
};

struct SuiteTask
{
    std::string name;
    std::string config;
    GoldScript script;
    GoalPredicate goal;
    std::vector<SuiteVariant> variants;
    std::vector<std::string> paraphrases;
};

struct TaskSuite
{
    std::string name;
    std::filesystem::path baseDir;
    std::vector<SuiteTask> tasks;

    /// One episode per (variant, paraphrase), ids "<task-slug>-v<N>-p<NN>".
    [[nodiscard]] std::vector<SuiteEpisode> episodes(std::size_t maxRounds = DefaultMaxRounds) const;
};

[[nodiscard]] TaskSuite suiteFromJson(const nlohmann::json& document, const std::filesystem::path& baseDir);
[[nodiscard]] TaskSuite loadSuite(const std::filesystem::path& path);

/// Builds the judge for one episode (loads the scene and resolves the config).
[[nodiscard]] JudgeContext judgeFor(const TaskSuite& suite,
                                    const SuiteEpisode& episode,
                                    JudgeMode mode,
                                    const SkillLibrary& library);

[[nodiscard]] MetricsTable scoreTraces(const TaskSuite& suite,
                                       const std::vector<SuiteEpisode>& episodes,
                                       const std::vector<EpisodeTrace>& traces,
                                       JudgeMode mode,
                                       const SkillLibrary& library);

using BackendFactory = std::function<std::shared_ptr<Backend>(const SuiteEpisode&, const TaskSuite&)>;

struct SuiteOptions
{
    JudgeMode judge = JudgeMode::Gold;
    std::size_t maxRounds = DefaultMaxRounds;
    std::size_t parallel = 1;
    std::optional<std::filesystem::path> outDir; // traces/<id>.jsonl and metrics.json
    ExecutorOptions executor;
};

struct SuiteRun
{
    std::vector<SuiteEpisode> episodes;
    std::vector<EpisodeTrace> traces;
    MetricsTable metrics;
};

/// Runs every episode; a failing episode only shows up in the metrics.
[[nodiscard]] SuiteRun runSuite(const TaskSuite& suite,
                                const BackendFactory& factory,
                                const SkillLibrary& library,
                                const SuiteOptions& options = {});

/// Rescores a suite from persisted traces in `traceDir`.
[[nodiscard]] MetricsTable recomputeMetrics(const TaskSuite& suite,
                                            const std::filesystem::path& traceDir,
                                            JudgeMode mode,
                                            const SkillLibrary& library,
                                            std::size_t maxRounds = DefaultMaxRounds);

[[nodiscard]] std::string slugify(std::string_view name);

} // namespace relep
