// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relep/plan_dsl.hpp>
#include <relep/planner.hpp>
#include <relep/skill_library.hpp>
#include <relep/transport.hpp>

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace relep
{

/// Bad or inconsistent dataset content (dangling ids, gold plans that do not execute).
class DataError: public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

enum class RecordStatus
{
    Raw,      // scenes only
    Proposed, // tasks and triplets
    Accepted,
    Edited,   // triplets only
    Rejected,
};

[[nodiscard]] std::string_view toString(RecordStatus status) noexcept;
[[nodiscard]] RecordStatus recordStatusFromString(std::string_view text);

struct SceneRecord
{
    std::string id;
    std::optional<std::string> imageRef;
    std::string sceneText;                    // filled from the scene file when empty
    std::optional<std::filesystem::path> sceneFile; // absolute once loaded
    std::string config = "humanoid";
    RecordStatus status = RecordStatus::Raw;
};

struct TaskProposal
{
    std::string id;
    std::string sceneId;
    std::string task;
    RecordStatus status = RecordStatus::Proposed;
};

struct Triplet
{
    std::string id;
    std::string sceneId;
    std::string task;
    std::string planText;
    std::optional<Plan> plan;              // set iff planText parses
    std::vector<std::string> diagnostics;  // parse diagnostics and legality violations
    RecordStatus status = RecordStatus::Proposed;
    std::optional<std::string> editNote;

    [[nodiscard]] bool usable() const { return status == RecordStatus::Accepted || status == RecordStatus::Edited; }
};

/// A directory of JSON records: scenes/<id>.json, tasks/<id>.json, triplets/<id>.json.
struct Store
{
    std::map<std::string, SceneRecord> scenes;
    std::map<std::string, TaskProposal> tasks;
    std::map<std::string, Triplet> triplets;

    [[nodiscard]] static Store load(const std::filesystem::path& dir, const SkillLibrary& library);
    /// Writes every record; scene files are stored relative to `dir`.
    void save(const std::filesystem::path& dir) const;
};

/// Source of generated tasks and plans.
class Generator
{
  public:
    virtual ~Generator() = default;
    [[nodiscard]] virtual std::vector<std::string> proposeTasks(const SceneRecord& scene, std::size_t count) = 0;
    [[nodiscard]] virtual std::string proposePlan(const SceneRecord& scene, const std::string& task, const std::string& prompt) = 0;
};

/// Fixture-driven generator: {"tasks": {scene id: [task...]}, "plans": {"<scene id>|<task>": text}}.
class ScriptedGenerator final: public Generator
{
  public:
    explicit ScriptedGenerator(nlohmann::json fixture);
    [[nodiscard]] static ScriptedGenerator fromFile(const std::filesystem::path& path);

    [[nodiscard]] std::vector<std::string> proposeTasks(const SceneRecord& scene, std::size_t count) override;
    [[nodiscard]] std::string proposePlan(const SceneRecord& scene, const std::string& task, const std::string& prompt) override;

  private:
    nlohmann::json _fixture;
};

/// Posts {purpose: "generate_tasks", scene, n} and {purpose: "generate_plan", prompt}; task replies are one per line.
class RemoteGenerator final: public Generator
{
  public:
    explicit RemoteGenerator(HttpTransport transport);

    [[nodiscard]] std::vector<std::string> proposeTasks(const SceneRecord& scene, std::size_t count) override;
    [[nodiscard]] std::string proposePlan(const SceneRecord& scene, const std::string& task, const std::string& prompt) override;

  private:
    HttpTransport _transport;
};

inline constexpr std::size_t DefaultTaskCount = 5;

/// Records up to `count` proposals for an accepted scene; returns their ids.
std::vector<std::string> generateTasks(Store& store, const std::string& sceneId, Generator& generator, std::size_t count = DefaultTaskCount);

/// The generation prompt: the full library, the robot configuration, the scene and the task.
[[nodiscard]] std::string planPrompt(const SceneRecord& scene, const std::string& task, const SkillLibrary& library);

/// Creates (or replaces) the proposed triplet for a task that is not rejected.
const Triplet& generatePlan(Store& store, const std::string& taskId, Generator& generator, const SkillLibrary& library);

/// Parse plus legality check for a triplet's config and starting hands. Empty means valid.
[[nodiscard]] std::vector<std::string> validateTripletPlan(const Store& store,
                                                           const std::string& sceneId,
                                                           const std::string& planText,
                                                           const SkillLibrary& library,
                                                           std::optional<Plan>* parsedOut = nullptr);

struct ReviewReport
{
    std::size_t applied = 0;
    std::vector<std::string> refused; // "<id>: <diagnostic>" for accepts/edits that failed validation
};

/// Applies {"decisions": [{target, action: accept|reject|edit, new_plan?, note?}]}. Throws DataError
/// naming the first dangling target before changing anything.
ReviewReport reviewApply(Store& store, const nlohmann::json& decisions, const SkillLibrary& library);

struct DialogueExample
{
    std::string id;
    std::string tripletId;
    std::size_t prefixLength = 0; // 0 for the initial round
    PlannerRequest prompt;
    std::string target;

    [[nodiscard]] bool sequential() const noexcept { return prefixLength > 0; }
    [[nodiscard]] nlohmann::json toJson() const;
};

/// One initial example plus one per executed prefix k = 1..L, each targeting the gold suffix.
[[nodiscard]] std::vector<DialogueExample> expandSequential(const Store& store,
                                                            const Triplet& triplet,
                                                            const SkillLibrary& library);

struct ExpansionCounts
{
    std::size_t triplets = 0;
    std::size_t initial = 0;
    std::size_t sequential = 0;
    std::size_t totalSteps = 0; // sum of gold plan lengths
};

[[nodiscard]] std::vector<DialogueExample> expandStore(const Store& store, const SkillLibrary& library, ExpansionCounts* counts = nullptr);

/// Serialized export, one line per example, ordered by triplet id then prefix length.
[[nodiscard]] std::string renderDialogues(const std::vector<DialogueExample>& examples);

struct ExportReport
{
    std::size_t records = 0;
    bool changed = true;
};

/// Writes the export to `path`, leaving a byte-identical file untouched.
ExportReport exportDialogues(const Store& store, const SkillLibrary& library, const std::filesystem::path& path);

} // namespace relep
