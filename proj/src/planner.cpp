// SPDX-License-Identifier: Apache-2.0
#include <relep/digest.hpp>
#include <relep/planner.hpp>
#include <relep/text.hpp>

#include <fmt/format.h>

#include <fstream>
#include <iterator>
#include <sstream>

namespace relep
{

// --- requests ----------------------------------------------------------------

std::string PlannerRequest::promptText() const
{
    return fmt::format("{}\n\n{}\n\n{}\n\nTask:\n{}\n\nObservation:\n{}",
                       configText,
                       libraryText,
                       memoryText,
                       task,
                       observation.sceneText);
}

nlohmann::json PlannerRequest::body() const
{
    auto document = nlohmann::json {
        { "task", task },
        { "round", round },
        { "sections",
          {
              { "config", configText },
              { "library", libraryText },
              { "memory", memoryText },
              { "observation", observation.sceneText },
          } },
    };
    if (imageBase64)
        document["image_base64"] = *imageBase64;
    return document;
}

std::string PlannerRequest::bodyText() const
{
    return body().dump();
}

std::string PlannerRequest::digest() const
{
    return sha256Hex(bodyText());
}

namespace
{
std::optional<std::string> readImage(const std::optional<std::string>& imageRef)
{
    if (!imageRef)
        return std::nullopt;
    auto in = std::ifstream(*imageRef, std::ios::binary);
    if (!in)
        return std::nullopt;
    auto bytes = std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return base64Encode(bytes);
}
} // namespace

PlannerRequest assembleRequest(const std::string& task,
                               const Observation& observation,
                               const MemoryState& memory,
                               const SkillLibrary& library,
                               const RobotConfig& config,
                               std::size_t round)
{
    return PlannerRequest {
        .task = task,
        .observation = observation,
        .configText = renderConfigSection(config),
        .libraryText = renderSkillSection(library, config),
        .memoryText = renderMemoryPrompt(memory),
        .round = round,
        .memory = memory,
        .imageBase64 = readImage(observation.imageRef),
    };
}

PlannerRequest withDiagnostics(PlannerRequest request, const std::vector<ParseDiagnostic>& diagnostics)
{
    request.memoryText += "\nYour last answer could not be parsed:";
    for (auto const& diagnostic: diagnostics)
        request.memoryText += "\n" + formatDiagnostic(diagnostic);
    return request;
}

std::string_view toString(BackendKind kind) noexcept
{
    switch (kind)
    {
        case BackendKind::ScriptedOracle: return "scripted-oracle";
        case BackendKind::ReplayCache: return "replay-cache";
        case BackendKind::RemoteModel: return "remote-model";
        case BackendKind::AmnesicBaseline: return "amnesic-baseline";
        case BackendKind::Recording: return "recording";
    }
    return "scripted-oracle";
}

PlannerResponse planOnce(Backend& backend, const PlannerRequest& request, const SkillLibrary& library)
{
    auto const started = std::chrono::steady_clock::now();
    auto raw = backend.complete(request);
    auto const latency =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    auto parsed = parsePlan(raw, library);
    return PlannerResponse { .rawText = std::move(raw), .parsed = std::move(parsed), .latency = latency };
}

// --- gold scripts ------------------------------------------------------------

bool ScriptCondition::matches(const PlannerRequest& request) const
{
    auto const& memory = request.memory;
    if (finished && memory.finishedSteps.size() != *finished)
        return false;
    if (failure && memory.lastFailure.has_value() != *failure)
        return false;
    if (failedSkill && (!memory.lastFailure || !iequals(memory.lastFailure->call.skill, *failedSkill)))
        return false;
    for (auto const& needle: observationContains)
    {
        if (!contains(request.observation.sceneText, needle))
            return false;
    }
    for (auto const& needle: observationLacks)
    {
        if (contains(request.observation.sceneText, needle))
            return false;
    }
    return true;
}

GoldScript goldScriptFromJson(const nlohmann::json& document)
{
    auto script = GoldScript {};
    for (auto const& entry: document.value("rules", nlohmann::json::array()))
    {
        auto rule = ScriptRule {};
        auto const planText = entry.at("plan");
        if (planText.is_array())
            rule.plan = join(planText.get<std::vector<std::string>>(), "\n");
        else
            rule.plan = planText.get<std::string>();
        auto const when = entry.value("when", nlohmann::json::object());
        if (when.contains("finished"))
            rule.when.finished = when.at("finished").get<std::size_t>();
        if (when.contains("failure"))
            rule.when.failure = when.at("failure").get<bool>();
        if (when.contains("failed_skill"))
            rule.when.failedSkill = when.at("failed_skill").get<std::string>();
        rule.when.observationContains = when.value("observation_contains", std::vector<std::string> {});
        rule.when.observationLacks = when.value("observation_lacks", std::vector<std::string> {});
        script.rules.push_back(std::move(rule));
    }
    for (auto const& entry: document.value("eqa", nlohmann::json::array()))
    {
        script.eqa.push_back(EqaTemplate {
            .match = entry.value("match", std::string {}),
            .answer = entry.at("answer").get<std::string>(),
        });
    }
    return script;
}

nlohmann::json goldScriptToJson(const GoldScript& script)
{
    auto rules = nlohmann::json::array();
    for (auto const& rule: script.rules)
    {
        auto when = nlohmann::json::object();
        if (rule.when.finished)
            when["finished"] = *rule.when.finished;
        if (rule.when.failure)
            when["failure"] = *rule.when.failure;
        if (rule.when.failedSkill)
            when["failed_skill"] = *rule.when.failedSkill;
        if (!rule.when.observationContains.empty())
            when["observation_contains"] = rule.when.observationContains;
        if (!rule.when.observationLacks.empty())
            when["observation_lacks"] = rule.when.observationLacks;
        rules.push_back({ { "when", when }, { "plan", rule.plan } });
    }
    auto eqa = nlohmann::json::array();
    for (auto const& entry: script.eqa)
        eqa.push_back({ { "match", entry.match }, { "answer", entry.answer } });
    return { { "rules", rules }, { "eqa", eqa } };
}

// --- backends ----------------------------------------------------------------

ScriptedOracle::ScriptedOracle(GoldScript script): _script(std::move(script))
{
}

std::string ScriptedOracle::complete(const PlannerRequest& request)
{
    auto const& memory = request.memory;
    if (memory.previousPlan && !memory.previousPlan->isBare() && !memory.lastFailure)
    {
        auto const remaining = memory.previousPlan->suffix(1);
        if (!remaining.isBarePending())
            return renderPlan(remaining);
    }
    for (auto const& rule: _script.rules)
    {
        if (rule.when.matches(request))
            return rule.plan;
    }
    throw BackendError(BackendErrorKind::ScriptGap,
                       fmt::format("no script rule matches round {} ({} finished steps{})",
                                   request.round,
                                   memory.finishedSteps.size(),
                                   memory.lastFailure ? ", after " + formatFailureNotice(*memory.lastFailure) : std::string {}));
}

AmnesicBackend::AmnesicBackend(std::shared_ptr<Backend> inner): _inner(std::move(inner))
{
}

PlannerRequest AmnesicBackend::forget(const PlannerRequest& request)
{
    auto blank = request;
    blank.memory.previousPlan.reset();
    blank.memory.finishedSteps.clear();
    blank.memory.detections.clear();
    blank.memory.utterances.clear();
    blank.memory.lastFailure.reset();
    blank.memoryText = renderMemoryPrompt(blank.memory);
    return blank;
}

std::string AmnesicBackend::complete(const PlannerRequest& request)
{
    return _inner->complete(forget(request));
}

RemoteBackend::RemoteBackend(HttpTransport transport): _transport(std::move(transport))
{
}

std::string RemoteBackend::complete(const PlannerRequest& request)
{
    return _transport.post(request.body());
}

RecordingBackend::RecordingBackend(std::shared_ptr<Backend> inner, ReplayCache cache):
    _inner(std::move(inner)), _cache(std::move(cache))
{
}

std::string RecordingBackend::complete(const PlannerRequest& request)
{
    auto text = _inner->complete(request);
    _cache.store(request.bodyText(), text);
    return text;
}

ReplayBackend::ReplayBackend(ReplayCache cache): _cache(std::move(cache))
{
}

std::string ReplayBackend::complete(const PlannerRequest& request)
{
    auto const body = request.bodyText();
    if (auto text = _cache.lookup(body))
        return *text;
    throw BackendError(BackendErrorKind::CacheMiss,
                       fmt::format("no recording for request {} in {}", ReplayCache::keyOf(body), _cache.directory().string()));
}

// --- EQA -----------------------------------------------------------------------

nlohmann::json EqaContext::toJson() const
{
    auto steps = nlohmann::json::array();
    for (auto const& step: finishedSteps)
        steps.push_back(renderCall(step));
    auto seen = nlohmann::json::array();
    for (auto const& detection: detections)
        seen.push_back({ { "object", detection.object }, { "step", detection.step } });
    auto said = nlohmann::json::array();
    for (auto const& utterance: utterances)
        said.push_back({ { "skill", utterance.skill }, { "text", utterance.text }, { "step", utterance.step } });
    return {
        { "task", task },
        { "query", query },
        { "self", selfDescription },
        { "finished_steps", steps },
        { "detections", seen },
        { "utterances", said },
        { "scene", sceneText },
    };
}

EqaContext buildEqaContext(const std::string& query,
                           const MemoryState& memory,
                           const Observation& observation,
                           const std::string& task,
                           const RobotConfig& config)
{
    return EqaContext {
        .task = task,
        .query = query,
        .selfDescription = config.description,
        .finishedSteps = memory.finishedSteps,
        .detections = memory.detections,
        .utterances = memory.utterances,
        .sceneText = observation.sceneText,
    };
}

namespace
{

// "A humanoid robot with two arms. It can ..." -> "a humanoid robot with two arms"
std::string selfPhrase(std::string_view description)
{
    auto sentence = std::string(trim(description.substr(0, description.find('.'))));
    if (!sentence.empty() && sentence[0] >= 'A' && sentence[0] <= 'Z')
        sentence[0] = static_cast<char>(sentence[0] - 'A' + 'a');
    return sentence.empty() ? std::string("a robot") : sentence;
}

std::string stepsPhrase(const std::vector<SkillCall>& steps)
{
    if (steps.empty())
        return "no steps have been performed yet";
    auto items = std::vector<std::string> {};
    for (auto i = std::size_t { 0 }; i < steps.size(); ++i)
        items.push_back(fmt::format("{}. {}", i + 1, renderCall(steps[i])));
    return join(items, "; ");
}

std::string scenePhrase(std::string_view sceneText)
{
    auto items = std::vector<std::string> {};
    for (auto const line: split(sceneText, '\n'))
    {
        if (line.substr(0, 2) == "- ")
            items.emplace_back(line.substr(2));
    }
    return items.empty() ? std::string("nothing") : join(items, "; ");
}

} // namespace

std::string fillTemplate(std::string_view pattern, const EqaContext& context)
{
    auto detections = std::vector<std::string> {};
    for (auto const& detection: context.detections)
        detections.push_back(fmt::format("{} (step {})", detection.object, detection.step));
    auto utterances = std::vector<std::string> {};
    for (auto const& utterance: context.utterances)
        utterances.push_back(fmt::format("{}: {}", utterance.skill, utterance.text));

    auto value = [&](std::string_view name) -> std::optional<std::string> {
        if (name == "query")
            return context.query;
        if (name == "task")
            return context.task;
        if (name == "self")
            return selfPhrase(context.selfDescription);
        if (name == "steps")
            return stepsPhrase(context.finishedSteps);
        if (name == "scene")
            return scenePhrase(context.sceneText);
        if (name == "detections")
            return detections.empty() ? std::string("none") : join(detections, "; ");
        if (name == "utterances")
            return utterances.empty() ? std::string("none") : join(utterances, "; ");
        return std::nullopt;
    };

    auto out = std::string {};
    auto pos = std::size_t { 0 };
    while (pos < pattern.size())
    {
        auto const open = pattern.find('{', pos);
        if (open == std::string_view::npos)
        {
            out += pattern.substr(pos);
            break;
        }
        auto const close = pattern.find('}', open);
        if (close == std::string_view::npos)
        {
            out += pattern.substr(pos);
            break;
        }
        out += pattern.substr(pos, open - pos);
        auto const name = pattern.substr(open + 1, close - open - 1);
        if (auto replacement = value(name))
            out += *replacement;
        else
            out += pattern.substr(open, close - open + 1);
        pos = close + 1;
    }
    return out;
}

ScriptedAnswerer::ScriptedAnswerer(std::vector<EqaTemplate> templates): _templates(std::move(templates))
{
}

std::string ScriptedAnswerer::answer(const EqaContext& context) const
{
    auto const query = toLower(context.query);
    for (auto const& entry: _templates)
    {
        if (entry.match.empty() || contains(query, toLower(entry.match)))
            return fillTemplate(entry.answer, context);
    }
    return fillTemplate("Question: {query}. I am {self}. Steps performed: {steps}. Visible now: {scene}.", context);
}

RemoteAnswerer::RemoteAnswerer(HttpTransport transport): _transport(std::move(transport))
{
}

std::string RemoteAnswerer::answer(const EqaContext& context) const
{
    return _transport.post({ { "purpose", "eqa" }, { "context", context.toJson() } });
}

std::string answerEqa(const std::string& query,
                      const MemoryState& memory,
                      const Observation& observation,
                      const std::string& task,
                      const RobotConfig& config,
                      const EqaAnswerer& answerer)
{
    return answerer.answer(buildEqaContext(query, memory, observation, task, config));
}

} // namespace relep
