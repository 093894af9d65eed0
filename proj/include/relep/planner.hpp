// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relep/memory.hpp>
#include <relep/plan_dsl.hpp>
#include <relep/skill_library.hpp>
#include <relep/transport.hpp>
#include <relep/world_sim.hpp>

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace relep
{

/// Everything the planning model sees in one round.
///
/// The text sections are what a remote model receives. `memory` is the structured snapshot the
/// sections were rendered from, so in-process backends can read it without re-parsing prose;
/// wrappers that alter one must alter the other.
struct PlannerRequest
{
    std::string task;
    Observation observation;
    std::string configText;
    std::string libraryText;
    std::string memoryText;
    std::size_t round = 0;
    MemoryState memory;
    std::optional<std::string> imageBase64;

    /// Full prompt in section order: configuration, library, memory, task, observation.
    [[nodiscard]] std::string promptText() const;
    /// Wire document {task, round, sections:{config, library, memory, observation}, image_base64?}.
    [[nodiscard]] nlohmann::json body() const;
    [[nodiscard]] std::string bodyText() const;
    [[nodiscard]] std::string digest() const;
};

[[nodiscard]] PlannerRequest assembleRequest(const std::string& task,
                                             const Observation& observation,
                                             const MemoryState& memory,
                                             const SkillLibrary& library,
                                             const RobotConfig& config,
                                             std::size_t round);

/// Appends parser diagnostics to the memory section so a retry can correct its output.
[[nodiscard]] PlannerRequest withDiagnostics(PlannerRequest request, const std::vector<ParseDiagnostic>& diagnostics);

struct PlannerResponse
{
    std::string rawText;
    ParseResult parsed;
    std::chrono::milliseconds latency { 0 };
};

enum class BackendKind
{
    ScriptedOracle,
    ReplayCache,
    RemoteModel,
    AmnesicBaseline,
    Recording,
};

[[nodiscard]] std::string_view toString(BackendKind kind) noexcept;

/// A planner backend maps a request to raw plan text. Backends throw BackendError on failure.
class Backend
{
  public:
    virtual ~Backend() = default;

    [[nodiscard]] virtual std::string complete(const PlannerRequest& request) = 0;
    [[nodiscard]] virtual BackendKind kind() const noexcept = 0;
    [[nodiscard]] virtual bool concurrentSafe() const noexcept { return true; }
};

/// Calls the backend once and parses its text against the library.
[[nodiscard]] PlannerResponse planOnce(Backend& backend, const PlannerRequest& request, const SkillLibrary& library);

// --- gold scripts ------------------------------------------------------------

struct ScriptCondition
{
    std::optional<std::size_t> finished;          // exact count of finished steps
    std::vector<std::string> observationContains; // substrings of the scene text
    std::vector<std::string> observationLacks;
    std::optional<bool> failure;                  // a failure notice is (not) present
    std::optional<std::string> failedSkill;

    [[nodiscard]] bool matches(const PlannerRequest& request) const;
};

struct ScriptRule
{
    ScriptCondition when;
    std::string plan;
};

struct EqaTemplate
{
    std::string match;  // case-insensitive substring of the query; empty matches anything
    std::string answer; // placeholders: {query} {task} {self} {steps} {scene} {detections} {utterances}
};

struct GoldScript
{
    std::vector<ScriptRule> rules;
    std::vector<EqaTemplate> eqa;
};

[[nodiscard]] GoldScript goldScriptFromJson(const nlohmann::json& document);
[[nodiscard]] nlohmann::json goldScriptToJson(const GoldScript& script);

/// Deterministic stand-in for the fine-tuned planner.
///
/// When the previous plan's first step was executed without failure, it re-emits that plan minus
/// its first step. Otherwise (first round, a failure notice, or a resolved Pending) it emits the
/// first rule whose condition holds, and raises a script-gap BackendError when none does.
class ScriptedOracle final: public Backend
{
  public:
    explicit ScriptedOracle(GoldScript script);

    [[nodiscard]] std::string complete(const PlannerRequest& request) override;
    [[nodiscard]] BackendKind kind() const noexcept override { return BackendKind::ScriptedOracle; }
    [[nodiscard]] const GoldScript& script() const noexcept { return _script; }

  private:
    GoldScript _script;
};

/// Wraps a backend and hands it a request whose memory (previous plan, finished steps,
/// failure notice) has been wiped.
class AmnesicBackend final: public Backend
{
  public:
    explicit AmnesicBackend(std::shared_ptr<Backend> inner);

    [[nodiscard]] std::string complete(const PlannerRequest& request) override;
    [[nodiscard]] BackendKind kind() const noexcept override { return BackendKind::AmnesicBaseline; }
    [[nodiscard]] bool concurrentSafe() const noexcept override { return _inner->concurrentSafe(); }

    [[nodiscard]] static PlannerRequest forget(const PlannerRequest& request);

  private:
    std::shared_ptr<Backend> _inner;
};

class RemoteBackend final: public Backend
{
  public:
    explicit RemoteBackend(HttpTransport transport);

    [[nodiscard]] std::string complete(const PlannerRequest& request) override;
    [[nodiscard]] BackendKind kind() const noexcept override { return BackendKind::RemoteModel; }

  private:
    HttpTransport _transport;
};

/// Passes requests through and records the raw text under the request-body hash.
class RecordingBackend final: public Backend
{
  public:
    RecordingBackend(std::shared_ptr<Backend> inner, ReplayCache cache);

    [[nodiscard]] std::string complete(const PlannerRequest& request) override;
    [[nodiscard]] BackendKind kind() const noexcept override { return BackendKind::Recording; }
    [[nodiscard]] bool concurrentSafe() const noexcept override { return _inner->concurrentSafe(); }

  private:
    std::shared_ptr<Backend> _inner;
    ReplayCache _cache;
};

/// Serves recorded text; a request that was never recorded raises a cache-miss BackendError.
class ReplayBackend final: public Backend
{
  public:
    explicit ReplayBackend(ReplayCache cache);

    [[nodiscard]] std::string complete(const PlannerRequest& request) override;
    [[nodiscard]] BackendKind kind() const noexcept override { return BackendKind::ReplayCache; }

  private:
    ReplayCache _cache;
};

// --- embodied question answering ---------------------------------------------

struct EqaContext
{
    std::string task;
    std::string query;
    std::string selfDescription;
    std::vector<SkillCall> finishedSteps;
    std::vector<Detection> detections;
    std::vector<Utterance> utterances;
    std::string sceneText;

    [[nodiscard]] nlohmann::json toJson() const;
};

[[nodiscard]] EqaContext buildEqaContext(const std::string& query,
                                         const MemoryState& memory,
                                         const Observation& observation,
                                         const std::string& task,
                                         const RobotConfig& config);

class EqaAnswerer
{
  public:
    virtual ~EqaAnswerer() = default;
    [[nodiscard]] virtual std::string answer(const EqaContext& context) const = 0;
};

/// Fills the first matching template, falling back to a summary of the context.
class ScriptedAnswerer final: public EqaAnswerer
{
  public:
    explicit ScriptedAnswerer(std::vector<EqaTemplate> templates = {});
    [[nodiscard]] std::string answer(const EqaContext& context) const override;

  private:
    std::vector<EqaTemplate> _templates;
};

class RemoteAnswerer final: public EqaAnswerer
{
  public:
    explicit RemoteAnswerer(HttpTransport transport);
    [[nodiscard]] std::string answer(const EqaContext& context) const override;

  private:
    HttpTransport _transport;
};

[[nodiscard]] std::string answerEqa(const std::string& query,
                                    const MemoryState& memory,
                                    const Observation& observation,
                                    const std::string& task,
                                    const RobotConfig& config,
                                    const EqaAnswerer& answerer);

/// Expands `{name}` placeholders of an EQA template against the context.
[[nodiscard]] std::string fillTemplate(std::string_view pattern, const EqaContext& context);

} // namespace relep
