// SPDX-License-Identifier: Apache-2.0
#include <relep/datagen.hpp>
#include <relep/memory.hpp>
#include <relep/text.hpp>
#include <relep/world_sim.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace relep
{

std::string_view toString(RecordStatus status) noexcept
{
    switch (status)
    {
        case RecordStatus::Raw: return "raw";
        case RecordStatus::Proposed: return "proposed";
        case RecordStatus::Accepted: return "accepted";
        case RecordStatus::Edited: return "edited";
        case RecordStatus::Rejected: return "rejected";
    }
    return "raw";
}

RecordStatus recordStatusFromString(std::string_view text)
{
    for (auto const status:
         { RecordStatus::Raw, RecordStatus::Proposed, RecordStatus::Accepted, RecordStatus::Edited, RecordStatus::Rejected })
    {
        if (toString(status) == text)
            return status;
    }
    throw DataError(fmt::format("unknown record status '{}'", text));
}

// --- store -------------------------------------------------------------------

namespace
{

nlohmann::json readJson(const std::filesystem::path& path)
{
    auto in = std::ifstream(path);
    if (!in)
        throw DataError(fmt::format("cannot open '{}'", path.string()));
    try
    {
        return nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::exception& e)
    {
        throw DataError(fmt::format("'{}': {}", path.string(), e.what()));
    }
}

void writeText(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    auto out = std::ofstream(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out)
        throw DataError(fmt::format("cannot write '{}'", path.string()));
}

std::vector<std::filesystem::path> jsonFilesIn(const std::filesystem::path& dir)
{
    auto files = std::vector<std::filesystem::path> {};
    if (!std::filesystem::is_directory(dir))
        return files;
    for (auto const& entry: std::filesystem::directory_iterator(dir))
    {
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    }
    std::ranges::sort(files);
    return files;
}

std::optional<Plan> parseQuietly(const std::string& text, const SkillLibrary& library)
{
    auto parsed = parsePlan(text, library);
    return parsed.ok() ? std::optional<Plan>(parsed.plan()) : std::nullopt;
}

} // namespace

Store Store::load(const std::filesystem::path& dir, const SkillLibrary& library)
{
    if (!std::filesystem::is_directory(dir))
        throw DataError(fmt::format("store '{}' is not a directory", dir.string()));
    auto store = Store {};
    try
    {
        for (auto const& path: jsonFilesIn(dir / "scenes"))
        {
            auto const doc = readJson(path);
            auto scene = SceneRecord {};
            scene.id = doc.at("id").get<std::string>();
            if (doc.contains("image_ref") && !doc.at("image_ref").is_null())
                scene.imageRef = doc.at("image_ref").get<std::string>();
            scene.sceneText = doc.value("scene_text", std::string {});
            if (doc.contains("scene_file") && !doc.at("scene_file").is_null())
                scene.sceneFile = std::filesystem::weakly_canonical(dir / doc.at("scene_file").get<std::string>());
            scene.config = doc.value("config", std::string("humanoid"));
            scene.status = recordStatusFromString(doc.value("status", std::string("raw")));
            if (scene.sceneText.empty() && scene.sceneFile)
                scene.sceneText = observe(loadSceneFile(*scene.sceneFile), 0).sceneText;
            store.scenes.emplace(scene.id, std::move(scene));
        }
        for (auto const& path: jsonFilesIn(dir / "tasks"))
        {
            auto const doc = readJson(path);
            auto task = TaskProposal {
                .id = doc.at("id").get<std::string>(),
                .sceneId = doc.at("scene_id").get<std::string>(),
                .task = doc.at("task").get<std::string>(),
                .status = recordStatusFromString(doc.value("status", std::string("proposed"))),
            };
            store.tasks.emplace(task.id, std::move(task));
        }
        for (auto const& path: jsonFilesIn(dir / "triplets"))
        {
            auto const doc = readJson(path);
            auto triplet = Triplet {};
            triplet.id = doc.at("id").get<std::string>();
            triplet.sceneId = doc.at("scene_id").get<std::string>();
            triplet.task = doc.at("task").get<std::string>();
            auto const& plan = doc.at("plan");
            triplet.planText = plan.is_array() ? join(plan.get<std::vector<std::string>>(), "\n") : plan.get<std::string>();
            triplet.plan = parseQuietly(triplet.planText, library);
            triplet.diagnostics = doc.value("diagnostics", std::vector<std::string> {});
            triplet.status = recordStatusFromString(doc.value("status", std::string("proposed")));
            if (doc.contains("edit_note") && !doc.at("edit_note").is_null())
                triplet.editNote = doc.at("edit_note").get<std::string>();
            store.triplets.emplace(triplet.id, std::move(triplet));
        }
    }
    catch (const nlohmann::json::exception& e)
    {
        throw DataError(fmt::format("store '{}': {}", dir.string(), e.what()));
    }
    for (auto const& [id, task]: store.tasks)
    {
        if (!store.scenes.contains(task.sceneId))
            throw DataError(fmt::format("task '{}' references unknown scene '{}'", id, task.sceneId));
    }
    for (auto const& [id, triplet]: store.triplets)
    {
        if (!store.scenes.contains(triplet.sceneId))
            throw DataError(fmt::format("triplet '{}' references unknown scene '{}'", id, triplet.sceneId));
    }
    return store;
}

void Store::save(const std::filesystem::path& dir) const
{
    auto const base = std::filesystem::weakly_canonical(std::filesystem::absolute(dir));
    for (auto const& [id, scene]: scenes)
    {
        auto doc = nlohmann::json {
            { "id", scene.id },
            { "scene_text", scene.sceneText },
            { "config", scene.config },
            { "status", toString(scene.status) },
        };
        if (scene.imageRef)
            doc["image_ref"] = *scene.imageRef;
        if (scene.sceneFile)
            doc["scene_file"] = std::filesystem::relative(*scene.sceneFile, base).generic_string();
        writeText(dir / "scenes" / (id + ".json"), doc.dump(2) + "\n");
    }
    for (auto const& [id, task]: tasks)
    {
        auto const doc = nlohmann::json {
            { "id", task.id },
            { "scene_id", task.sceneId },
            { "task", task.task },
            { "status", toString(task.status) },
        };
        writeText(dir / "tasks" / (id + ".json"), doc.dump(2) + "\n");
    }
    for (auto const& [id, triplet]: triplets)
    {
        auto doc = nlohmann::json {
            { "id", triplet.id },
            { "scene_id", triplet.sceneId },
            { "task", triplet.task },
            { "plan", triplet.planText },
            { "diagnostics", triplet.diagnostics },
            { "status", toString(triplet.status) },
        };
        if (triplet.editNote)
            doc["edit_note"] = *triplet.editNote;
        writeText(dir / "triplets" / (id + ".json"), doc.dump(2) + "\n");
    }
}

// --- generators --------------------------------------------------------------

ScriptedGenerator::ScriptedGenerator(nlohmann::json fixture): _fixture(std::move(fixture))
{
}

ScriptedGenerator ScriptedGenerator::fromFile(const std::filesystem::path& path)
{
    return ScriptedGenerator(readJson(path));
}

std::vector<std::string> ScriptedGenerator::proposeTasks(const SceneRecord& scene, std::size_t count)
{
    auto const& tasks = _fixture.value("tasks", nlohmann::json::object());
    if (!tasks.contains(scene.id))
        throw BackendError(BackendErrorKind::ScriptGap, fmt::format("no scripted tasks for scene '{}'", scene.id));
    auto proposals = tasks.at(scene.id).get<std::vector<std::string>>();
    if (proposals.size() > count)
        proposals.resize(count);
    return proposals;
}

std::string ScriptedGenerator::proposePlan(const SceneRecord& scene, const std::string& task, const std::string&)
{
    auto const& plans = _fixture.value("plans", nlohmann::json::object());
    auto const key = scene.id + "|" + task;
    if (!plans.contains(key))
        throw BackendError(BackendErrorKind::ScriptGap, fmt::format("no scripted plan for '{}'", key));
    auto const& plan = plans.at(key);
    return plan.is_array() ? join(plan.get<std::vector<std::string>>(), "\n") : plan.get<std::string>();
}

RemoteGenerator::RemoteGenerator(HttpTransport transport): _transport(std::move(transport))
{
}

std::vector<std::string> RemoteGenerator::proposeTasks(const SceneRecord& scene, std::size_t count)
{
    auto body = nlohmann::json {
        { "purpose", "generate_tasks" },
        { "scene_id", scene.id },
        { "scene_text", scene.sceneText },
        { "n", count },
    };
    if (scene.imageRef)
        body["image_ref"] = *scene.imageRef;
    auto proposals = std::vector<std::string> {};
    for (auto const line: split(_transport.post(body), '\n'))
    {
        auto const task = trim(line);
        if (!task.empty() && proposals.size() < count)
            proposals.emplace_back(task);
    }
    return proposals;
}

std::string RemoteGenerator::proposePlan(const SceneRecord& scene, const std::string& task, const std::string& prompt)
{
    return _transport.post({ { "purpose", "generate_plan" }, { "scene_id", scene.id }, { "task", task }, { "prompt", prompt } });
}

// --- pipeline stages ---------------------------------------------------------

namespace
{

const SceneRecord& sceneOf(const Store& store, const std::string& sceneId)
{
    auto const it = store.scenes.find(sceneId);
    if (it == store.scenes.end())
        throw DataError(fmt::format("unknown scene '{}'", sceneId));
    return it->second;
}

RobotConfig allSkillsConfig(const SkillLibrary& library, RobotConfig config)
{
    for (auto const& skill: library.specs())
        config.availableSkills.insert(skill.name);
    return config;
}

} // namespace

std::vector<std::string> generateTasks(Store& store, const std::string& sceneId, Generator& generator, std::size_t count)
{
    auto const& scene = sceneOf(store, sceneId);
    if (scene.status != RecordStatus::Accepted)
        throw DataError(fmt::format("scene '{}' is {}, only accepted scenes get tasks", sceneId, toString(scene.status)));

    auto ids = std::vector<std::string> {};
    auto index = std::size_t { 0 };
    for (auto const& text: generator.proposeTasks(scene, count))
    {
        auto id = std::string {};
        do
            id = fmt::format("{}-t{:02}", sceneId, ++index);
        while (store.tasks.contains(id) || store.triplets.contains(id));
        store.tasks.emplace(id, TaskProposal { .id = id, .sceneId = sceneId, .task = text, .status = RecordStatus::Proposed });
        ids.push_back(std::move(id));
    }
    return ids;
}

std::string planPrompt(const SceneRecord& scene, const std::string& task, const SkillLibrary& library)
{
    auto const config = resolveConfig(scene.config, library);
    return fmt::format("{}\n\n{}\n\nScene:\n{}\n\nTask:\n{}\n",
                       renderSkillSection(library, allSkillsConfig(library, config)),
                       renderConfigSection(config),
                       scene.sceneText,
                       task);
}

std::vector<std::string> validateTripletPlan(const Store& store,
                                             const std::string& sceneId,
                                             const std::string& planText,
                                             const SkillLibrary& library,
                                             std::optional<Plan>* parsedOut)
{
    auto const& scene = sceneOf(store, sceneId);
    auto problems = std::vector<std::string> {};
    auto parsed = parsePlan(planText, library);
    if (!parsed.ok())
    {
        for (auto const& d: parsed.diagnostics())
            problems.push_back(formatDiagnostic(d));
        if (parsedOut)
            parsedOut->reset();
        return problems;
    }
    if (parsedOut)
        *parsedOut = parsed.plan();

    auto const config = resolveConfig(scene.config, library);
    auto const violations = scene.sceneFile ? checkLegality(parsed.plan(), config, loadSceneFile(*scene.sceneFile).robotHands)
                                            : checkLegality(parsed.plan(), config, config.armCount);
    for (auto const& v: violations)
        problems.push_back(formatViolation(v));
    return problems;
}

const Triplet& generatePlan(Store& store, const std::string& taskId, Generator& generator, const SkillLibrary& library)
{
    auto const taskIt = store.tasks.find(taskId);
    if (taskIt == store.tasks.end())
        throw DataError(fmt::format("unknown task '{}'", taskId));
    auto const& task = taskIt->second;
    if (task.status == RecordStatus::Rejected)
        throw DataError(fmt::format("task '{}' was rejected", taskId));

    auto const& scene = sceneOf(store, task.sceneId);
    auto triplet = Triplet {};
    triplet.id = taskId;
    triplet.sceneId = task.sceneId;
    triplet.task = task.task;
    triplet.planText = generator.proposePlan(scene, task.task, planPrompt(scene, task.task, library));
    triplet.diagnostics = validateTripletPlan(store, task.sceneId, triplet.planText, library, &triplet.plan);
    triplet.status = RecordStatus::Proposed;
    store.triplets.insert_or_assign(triplet.id, triplet);
    return store.triplets.at(taskId);
}

ReviewReport reviewApply(Store& store, const nlohmann::json& decisions, const SkillLibrary& library)
{
    auto const& list = decisions.is_array() ? decisions : decisions.at("decisions");
    for (auto const& d: list)
    {
        auto const target = d.at("target").get<std::string>();
        if (!store.scenes.contains(target) && !store.tasks.contains(target) && !store.triplets.contains(target))
            throw DataError(fmt::format("decision references unknown record '{}'", target));
        auto const action = d.at("action").get<std::string>();
        if (action != "accept" && action != "reject" && action != "edit")
            throw DataError(fmt::format("decision for '{}' has unknown action '{}'", target, action));
        if (action == "edit" && (!store.triplets.contains(target) || !d.contains("new_plan")))
            throw DataError(fmt::format("edit of '{}' needs a triplet target and new_plan", target));
    }

    auto report = ReviewReport {};
    for (auto const& d: list)
    {
        auto const target = d.at("target").get<std::string>();
        auto const action = d.at("action").get<std::string>();
        auto const status = action == "reject" ? RecordStatus::Rejected : RecordStatus::Accepted;
        ++report.applied;

        if (auto it = store.scenes.find(target); it != store.scenes.end())
        {
            if (status == RecordStatus::Accepted && it->second.sceneText.empty() && !it->second.imageRef)
            {
                report.refused.push_back(fmt::format("{}: scene has neither text nor image", target));
                continue;
            }
            it->second.status = status;
            continue;
        }
        auto const tripletIt = store.triplets.find(target);
        auto const taskIt = store.tasks.find(target);
        if (tripletIt == store.triplets.end())
        {
            taskIt->second.status = status;
            continue;
        }

        // A triplet shares its id with the task it answers; the task follows the triplet's fate.
        auto& triplet = tripletIt->second;
        auto settle = [&](RecordStatus next) {
            triplet.status = next;
            if (taskIt != store.tasks.end())
                taskIt->second.status = next == RecordStatus::Rejected ? RecordStatus::Rejected : RecordStatus::Accepted;
        };
        if (action == "reject")
        {
            settle(RecordStatus::Rejected);
            continue;
        }
        auto const& newPlan = d.contains("new_plan") ? d.at("new_plan") : nlohmann::json(triplet.planText);
        auto const text = newPlan.is_array() ? join(newPlan.get<std::vector<std::string>>(), "\n") : newPlan.get<std::string>();
        auto parsed = std::optional<Plan> {};
        auto problems = validateTripletPlan(store, triplet.sceneId, text, library, &parsed);
        if (!problems.empty())
        {
            if (action == "edit")
            {
                triplet.planText = text;
                triplet.plan = parsed;
            }
            triplet.diagnostics = problems;
            settle(RecordStatus::Rejected);
            for (auto const& p: problems)
                report.refused.push_back(fmt::format("{}: {}", target, p));
            continue;
        }
        triplet.planText = text;
        triplet.plan = parsed;
        triplet.diagnostics.clear();
        settle(action == "edit" ? RecordStatus::Edited : RecordStatus::Accepted);
        if (d.contains("note"))
            triplet.editNote = d.at("note").get<std::string>();
    }
    return report;
}

// --- expansion and export ----------------------------------------------------

nlohmann::json DialogueExample::toJson() const
{
    auto out = nlohmann::json {
        { "id", id },
        { "triplet", tripletId },
        { "round", sequential() ? "sequential" : "initial" },
        { "prefix_length", prefixLength },
        { "prompt",
          {
              { "config", prompt.configText },
              { "library", prompt.libraryText },
              { "memory", prompt.memoryText },
              { "task", prompt.task },
              { "observation", prompt.observation.sceneText },
          } },
        { "target", target },
    };
    if (prompt.observation.imageRef)
        out["image_ref"] = *prompt.observation.imageRef;
    return out;
}

std::vector<DialogueExample> expandSequential(const Store& store, const Triplet& triplet, const SkillLibrary& library)
{
    if (!triplet.usable())
        throw DataError(fmt::format("triplet '{}' is {}, only accepted or edited triplets expand", triplet.id, toString(triplet.status)));
    if (!triplet.plan)
        throw DataError(fmt::format("triplet '{}' has no parsed plan", triplet.id));
    auto const& scene = sceneOf(store, triplet.sceneId);
    if (!scene.sceneFile)
        throw DataError(fmt::format("scene '{}' has no scene file to execute against", scene.id));
    if (auto const problems = validateTripletPlan(store, triplet.sceneId, triplet.planText, library); !problems.empty())
        throw DataError(fmt::format("triplet '{}': {}", triplet.id, problems.front()));

    auto const config = resolveConfig(scene.config, library);
    auto const& plan = *triplet.plan;
    auto const answerer = ScriptedAnswerer();
    auto world = loadSceneFile(*scene.sceneFile);
    auto memory = freshMemory(world);

    auto examples = std::vector<DialogueExample> {};
    auto emit = [&](std::size_t k) {
        auto request = assembleRequest(triplet.task, observe(world, k), memory, library, config, k);
        request.imageBase64.reset(); // the export carries image_ref; pixels stay out of the dataset
        examples.push_back(DialogueExample {
            .id = fmt::format("{}-r{:02}", triplet.id, k),
            .tripletId = triplet.id,
            .prefixLength = k,
            .prompt = std::move(request),
            .target = renderPlan(plan.suffix(k)),
        });
    };

    emit(0);
    for (auto k = std::size_t { 1 }; k <= plan.steps.size(); ++k)
    {
        auto const& step = plan.steps[k - 1];
        memory = recordPlan(std::move(memory), plan.suffix(k - 1));
        auto const observation = observe(world, k - 1);
        auto const eqa = [&](std::string_view query) {
            return answerEqa(std::string(query), memory, observation, triplet.task, config, answerer);
        };
        auto result = applySkill(world, step, eqa);
        if (!result.outcome.success)
            throw DataError(fmt::format("triplet '{}': gold step {} {} fails: {} ({})",
                                        triplet.id,
                                        k,
                                        renderCall(step),
                                        toString(*result.outcome.failureReason),
                                        result.outcome.worldDelta));
        world = std::move(result.world);
        memory = recordStep(std::move(memory), step, result.outcome, statusFromWorld(world));
        emit(k);
    }
    return examples;
}

std::vector<DialogueExample> expandStore(const Store& store, const SkillLibrary& library, ExpansionCounts* counts)
{
    auto all = std::vector<DialogueExample> {};
    auto local = ExpansionCounts {};
    for (auto const& [id, triplet]: store.triplets)
    {
        if (!triplet.usable())
            continue;
        auto examples = expandSequential(store, triplet, library);
        ++local.triplets;
        local.totalSteps += triplet.plan->steps.size();
        for (auto& example: examples)
        {
            ++(example.sequential() ? local.sequential : local.initial);
            all.push_back(std::move(example));
        }
    }
    if (counts)
        *counts = local;
    return all;
}

std::string renderDialogues(const std::vector<DialogueExample>& examples)
{
    auto sorted = std::vector<const DialogueExample*> {};
    for (auto const& e: examples)
        sorted.push_back(&e);
    std::ranges::sort(sorted, [](auto const* a, auto const* b) {
        return std::tie(a->tripletId, a->prefixLength) < std::tie(b->tripletId, b->prefixLength);
    });
    auto out = std::string {};
    for (auto const* e: sorted)
        out += e->toJson().dump() + "\n";
    return out;
}

ExportReport exportDialogues(const Store& store, const SkillLibrary& library, const std::filesystem::path& path)
{
    auto const examples = expandStore(store, library);
    auto const text = renderDialogues(examples);
    auto report = ExportReport { .records = examples.size(), .changed = true };
    if (std::filesystem::exists(path))
    {
        auto in = std::ifstream(path, std::ios::binary);
        auto existing = std::stringstream {};
        existing << in.rdbuf();
        if (existing.str() == text)
        {
            report.changed = false;
            return report;
        }
    }
    writeText(path, text);
    return report;
}

} // namespace relep
