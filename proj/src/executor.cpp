// SPDX-License-Identifier: Apache-2.0
#include <relep/digest.hpp>
#include <relep/executor.hpp>
#include <relep/text.hpp>

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace relep
{

void validateEpisode(const EpisodeSpec& spec)
{
    if (spec.maxRounds == 0)
        throw ConfigError(fmt::format("episode '{}': max_rounds must be at least 1", spec.id));
    if (trim(spec.task).empty())
        throw ConfigError(fmt::format("episode '{}': empty task", spec.id));
    if (spec.scene.empty())
        throw ConfigError(fmt::format("episode '{}': no scene", spec.id));
}

std::string_view toString(VerdictKind kind) noexcept
{
    switch (kind)
    {
        case VerdictKind::Completed: return "completed";
        case VerdictKind::Failed: return "failed";
        case VerdictKind::ExhaustedRounds: return "exhausted-rounds";
    }
    return "failed";
}

std::size_t EpisodeTrace::executedSteps() const
{
    auto count = std::size_t { 0 };
    for (auto const& round: rounds)
        count += round.executed ? 1 : 0;
    return count;
}

std::size_t EpisodeTrace::successfulSteps() const
{
    auto count = std::size_t { 0 };
    for (auto const& round: rounds)
        count += (round.outcome && round.outcome->success) ? 1 : 0;
    return count;
}

MemoryState replanOnFailure(const RoundRecord& last, MemoryState memory)
{
    if (last.executed && last.outcome && !last.outcome->success)
    {
        memory.lastFailure = FailureNotice {
            .call = *last.executed,
            .reason = last.outcome->failureReason.value_or(FailureReason::UnknownObject),
        };
    }
    return memory;
}

namespace
{

struct Attempt
{
    std::optional<PlannerResponse> response;
    std::string error;
    std::int64_t latencyMs = 0;
};

Attempt callWithRetries(Backend& backend,
                        const PlannerRequest& request,
                        const SkillLibrary& library,
                        std::size_t retries)
{
    auto attempt = Attempt {};
    for (auto i = std::size_t { 0 }; i <= retries; ++i)
    {
        try
        {
            attempt.response = planOnce(backend, request, library);
            attempt.latencyMs += attempt.response->latency.count();
            return attempt;
        }
        catch (const BackendError& e)
        {
            attempt.error = e.what();
        }
    }
    return attempt;
}

} // namespace

EpisodeRun runEpisode(const EpisodeSpec& spec,
                      Backend& backend,
                      const SkillLibrary& library,
                      const RobotConfig& config,
                      const WorldState& initialWorld,
                      const EqaAnswerer& answerer,
                      const ExecutorOptions& options)
{
    validateEpisode(spec);

    auto world = initialWorld;
    auto memory = freshMemory(world);
    auto trace = EpisodeTrace {
        .episodeId = spec.id,
        .task = spec.task,
        .scene = spec.scene.generic_string(),
        .config = config.name,
        .rounds = {},
        .verdict = {},
    };
    auto finish = [&](VerdictKind kind, std::string reason) {
        trace.verdict = Verdict { .kind = kind, .reason = std::move(reason) };
        return EpisodeRun { .trace = std::move(trace), .finalWorld = std::move(world), .finalMemory = std::move(memory) };
    };

    for (auto t = std::size_t { 0 }; t < spec.maxRounds; ++t)
    {
        auto const observation = observe(world, t);
        auto const request = assembleRequest(spec.task, observation, memory, library, config, t);

        auto record = RoundRecord {};
        record.round = t;
        record.requestDigest = request.digest();
        record.observationDigest = sha256Hex(observation.sceneText);

        auto attempt = callWithRetries(backend, request, library, options.transportRetries);
        record.latencyMs = attempt.latencyMs;
        if (!attempt.response)
        {
            trace.rounds.push_back(std::move(record));
            return finish(VerdictKind::Failed, "backend: " + attempt.error);
        }
        if (!attempt.response->parsed.ok())
        {
            record.retried = true;
            auto const retry = withDiagnostics(request, attempt.response->parsed.diagnostics());
            auto second = callWithRetries(backend, retry, library, options.transportRetries);
            record.latencyMs += second.latencyMs;
            if (!second.response)
            {
                record.rawText = attempt.response->rawText;
                record.diagnostics = attempt.response->parsed.diagnostics();
                trace.rounds.push_back(std::move(record));
                return finish(VerdictKind::Failed, "backend: " + second.error);
            }
            attempt = std::move(second);
        }

        auto const& response = *attempt.response;
        record.rawText = response.rawText;
        if (!response.parsed.ok())
        {
            record.diagnostics = response.parsed.diagnostics();
            trace.rounds.push_back(std::move(record));
            return finish(VerdictKind::Failed, "unparseable");
        }

        auto const& plan = response.parsed.plan();
        record.plan = plan;
        memory = recordPlan(std::move(memory), plan);

        if (plan.isBareDone())
        {
            trace.rounds.push_back(std::move(record));
            return finish(VerdictKind::Completed, {});
        }
        if (plan.isBarePending())
        {
            trace.rounds.push_back(std::move(record));
            continue;
        }

        auto const& step = plan.steps.front();
        auto outcome = SkillOutcome {};
        if (!config.hasSkill(step.skill))
            outcome = SkillOutcome::fail(FailureReason::SkillUnavailable,
                                         fmt::format("{} is not available to the {} robot", step.skill, config.name));
        else
        {
            auto const eqa = [&](std::string_view query) {
                return answerEqa(std::string(query), memory, observation, spec.task, config, answerer);
            };
            auto result = applySkill(world, step, eqa);
            world = std::move(result.world);
            outcome = std::move(result.outcome);
        }

        record.executed = step;
        record.outcome = outcome;
        memory = recordStep(std::move(memory), step, outcome, statusFromWorld(world));
        memory = replanOnFailure(record, std::move(memory));
        if (memory.status != statusFromWorld(world))
            throw std::logic_error("memory robot status diverged from the world");
        trace.rounds.push_back(std::move(record));
    }
    return finish(VerdictKind::ExhaustedRounds, {});
}

EpisodeRun runEpisode(const EpisodeSpec& spec, Backend& backend, const SkillLibrary& library, const ExecutorOptions& options)
{
    auto const world = loadSceneFile(spec.scene);
    auto const config = resolveConfig(spec.config, library, spec.scene.parent_path());
    auto const answerer = ScriptedAnswerer(spec.script ? spec.script->eqa : std::vector<EqaTemplate> {});
    return runEpisode(spec, backend, library, config, world, answerer, options);
}

// --- trace files -------------------------------------------------------------

namespace
{

nlohmann::json roundToJson(const RoundRecord& record, bool includeLatency)
{
    auto diagnostics = nlohmann::json::array();
    for (auto const& d: record.diagnostics)
        diagnostics.push_back({ { "line", d.line }, { "kind", toString(d.kind) }, { "message", d.message } });

    auto line = nlohmann::json {
        { "type", "round" },
        { "round", record.round },
        { "request_digest", record.requestDigest },
        { "observation_digest", record.observationDigest },
        { "raw_text", record.rawText },
        { "retried", record.retried },
        { "diagnostics", diagnostics },
        { "plan", record.plan ? nlohmann::json(renderPlan(*record.plan)) : nlohmann::json(nullptr) },
        { "executed", record.executed ? nlohmann::json(renderCall(*record.executed)) : nlohmann::json(nullptr) },
        { "outcome", nullptr },
    };
    if (record.outcome)
    {
        auto const& o = *record.outcome;
        line["outcome"] = {
            { "success", o.success },
            { "delta", o.worldDelta },
            { "reason", o.failureReason ? nlohmann::json(toString(*o.failureReason)) : nlohmann::json(nullptr) },
            { "utterance", o.utterance ? nlohmann::json(*o.utterance) : nlohmann::json(nullptr) },
        };
    }
    if (includeLatency)
        line["latency_ms"] = record.latencyMs;
    return line;
}

std::optional<DiagnosticKind> diagnosticKindFromString(std::string_view text)
{
    for (auto const kind: { DiagnosticKind::Syntax,
                            DiagnosticKind::UnknownSkill,
                            DiagnosticKind::Arity,
                            DiagnosticKind::BadArgument,
                            DiagnosticKind::MissingTerminal,
                            DiagnosticKind::TrailingContent })
    {
        if (toString(kind) == text)
            return kind;
    }
    return std::nullopt;
}

Plan requirePlan(const std::string& text, const SkillLibrary& library)
{
    auto parsed = parsePlan(text, library);
    if (!parsed.ok())
        throw std::runtime_error(fmt::format("trace holds an unparseable plan: {}", formatDiagnostic(parsed.diagnostics().front())));
    return parsed.plan();
}

} // namespace

std::string traceToJsonl(const EpisodeTrace& trace, bool includeLatency)
{
    auto out = std::string {};
    auto header = nlohmann::json {
        { "type", "episode" },
        { "id", trace.episodeId },
        { "task", trace.task },
        { "scene", trace.scene },
        { "config", trace.config },
    };
    out += header.dump() + "\n";
    for (auto const& record: trace.rounds)
        out += roundToJson(record, includeLatency).dump() + "\n";
    auto verdict = nlohmann::json {
        { "type", "verdict" },
        { "verdict", toString(trace.verdict.kind) },
        { "reason", trace.verdict.reason },
        { "rounds", trace.rounds.size() },
        { "executed_steps", trace.executedSteps() },
    };
    out += verdict.dump() + "\n";
    return out;
}

EpisodeTrace traceFromJsonl(std::string_view text, const SkillLibrary& library)
{
    auto trace = EpisodeTrace {};
    auto sawVerdict = false;
    for (auto const rawLine: split(text, '\n'))
    {
        auto const line = trim(rawLine);
        if (line.empty())
            continue;
        auto const record = nlohmann::json::parse(line);
        auto const type = record.at("type").get<std::string>();
        if (type == "episode")
        {
            trace.episodeId = record.at("id").get<std::string>();
            trace.task = record.at("task").get<std::string>();
            trace.scene = record.at("scene").get<std::string>();
            trace.config = record.at("config").get<std::string>();
        }
        else if (type == "round")
        {
            auto round = RoundRecord {};
            round.round = record.at("round").get<std::size_t>();
            round.requestDigest = record.at("request_digest").get<std::string>();
            round.observationDigest = record.at("observation_digest").get<std::string>();
            round.rawText = record.at("raw_text").get<std::string>();
            round.retried = record.at("retried").get<bool>();
            round.latencyMs = record.value("latency_ms", std::int64_t { 0 });
            for (auto const& d: record.at("diagnostics"))
            {
                round.diagnostics.push_back(ParseDiagnostic {
                    .line = d.at("line").get<std::size_t>(),
                    .kind = diagnosticKindFromString(d.at("kind").get<std::string>()).value_or(DiagnosticKind::Syntax),
                    .message = d.at("message").get<std::string>(),
                });
            }
            if (!record.at("plan").is_null())
                round.plan = requirePlan(record.at("plan").get<std::string>(), library);
            if (!record.at("executed").is_null())
                round.executed = requirePlan(record.at("executed").get<std::string>() + "\nDone", library).steps.at(0);
            if (auto const& o = record.at("outcome"); !o.is_null())
            {
                auto outcome = SkillOutcome {};
                outcome.success = o.at("success").get<bool>();
                outcome.worldDelta = o.at("delta").get<std::string>();
                if (!o.at("reason").is_null())
                    outcome.failureReason = failureReasonFromString(o.at("reason").get<std::string>());
                if (!o.at("utterance").is_null())
                    outcome.utterance = o.at("utterance").get<std::string>();
                round.outcome = std::move(outcome);
            }
            trace.rounds.push_back(std::move(round));
        }
        else if (type == "verdict")
        {
            auto const kind = record.at("verdict").get<std::string>();
            trace.verdict.kind = kind == "completed" ? VerdictKind::Completed
                                 : kind == "failed"  ? VerdictKind::Failed
                                                     : VerdictKind::ExhaustedRounds;
            trace.verdict.reason = record.at("reason").get<std::string>();
            sawVerdict = true;
        }
    }
    if (!sawVerdict)
        throw std::runtime_error(fmt::format("trace '{}' has no verdict record", trace.episodeId));
    return trace;
}

void writeTraceFile(const std::filesystem::path& path, const EpisodeTrace& trace)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    auto out = std::ofstream(path, std::ios::binary | std::ios::trunc);
    out << traceToJsonl(trace);
    if (!out)
        throw std::runtime_error(fmt::format("cannot write trace '{}'", path.string()));
}

EpisodeTrace readTraceFile(const std::filesystem::path& path, const SkillLibrary& library)
{
    auto in = std::ifstream(path, std::ios::binary);
    if (!in)
        throw std::runtime_error(fmt::format("cannot open trace '{}'", path.string()));
    auto buffer = std::stringstream {};
    buffer << in.rdbuf();
    return traceFromJsonl(buffer.str(), library);
}

} // namespace relep
