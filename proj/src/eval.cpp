// SPDX-License-Identifier: Apache-2.0
#include <relep/eval.hpp>
#include <relep/text.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace relep
{

std::string_view toString(JudgeMode mode) noexcept
{
    return mode == JudgeMode::Gold ? "gold" : "goal";
}

JudgeMode judgeModeFromString(std::string_view text)
{
    auto const lowered = toLower(trim(text));
    if (lowered == "gold")
        return JudgeMode::Gold;
    if (lowered == "goal")
        return JudgeMode::Goal;
    throw ConfigError(fmt::format("unknown judge mode '{}', expected gold or goal", text));
}

// --- goal predicates ---------------------------------------------------------

namespace
{

constexpr std::pair<GoalKind, std::string_view> GoalKeys[] = {
    { GoalKind::State, "state" },       { GoalKind::Pose, "pose" },
    { GoalKind::Held, "held" },         { GoalKind::On, "on" },
    { GoalKind::Inside, "inside" },     { GoalKind::InZone, "in_zone" },
    { GoalKind::RobotZone, "robot_zone" }, { GoalKind::UtteranceContains, "utterance_contains" },
};

std::string_view goalKey(GoalKind kind)
{
    for (auto const& [k, key]: GoalKeys)
    {
        if (k == kind)
            return key;
    }
    return "state";
}

bool conditionHolds(const GoalCondition& condition, const WorldState& world, const std::vector<std::string>& utterances)
{
    if (condition.kind == GoalKind::UtteranceContains)
    {
        auto const needle = toLower(condition.value);
        return std::ranges::any_of(utterances, [&](auto const& u) { return contains(toLower(u), needle); });
    }
    if (condition.kind == GoalKind::RobotZone)
        return resolveZone(world, condition.value) == world.robotZone;

    auto const id = resolveObject(world, condition.object);
    if (!id)
        return false;
    auto const& object = world.objects.at(*id);
    switch (condition.kind)
    {
        case GoalKind::State: return object.states.contains(toLower(condition.value));
        case GoalKind::Pose: return object.pose && normalizeReference(*object.pose) == normalizeReference(condition.value);
        case GoalKind::Held: return object.location.kind == LocationKind::Hand;
        case GoalKind::On:
        {
            auto const support = resolveObject(world, condition.value);
            if (!support || object.location.kind != LocationKind::Zone || object.location.support != *support)
                return false;
            return !condition.side
                   || (object.location.side && normalizeReference(*object.location.side) == normalizeReference(*condition.side));
        }
        case GoalKind::Inside:
        {
            auto const container = resolveObject(world, condition.value);
            return container && object.location.kind == LocationKind::Container && object.location.ref == *container;
        }
        case GoalKind::InZone: return resolveZone(world, condition.value) == effectiveZone(world, *id);
        default: return false;
    }
}

GoalCondition conditionFromJson(const nlohmann::json& entry)
{
    auto condition = GoalCondition {};
    for (auto const& [kind, key]: GoalKeys)
    {
        auto const name = std::string(key);
        if (!entry.contains(name))
            continue;
        condition.kind = kind;
        auto const& value = entry.at(name);
        if (kind == GoalKind::Held)
            condition.value = value.is_boolean() ? (value.get<bool>() ? "true" : "false") : value.get<std::string>();
        else
            condition.value = value.get<std::string>();
        condition.object = entry.value("object", std::string {});
        if (entry.contains("side"))
            condition.side = entry.at("side").get<std::string>();
        if (condition.object.empty() && kind != GoalKind::RobotZone && kind != GoalKind::UtteranceContains)
            throw ConfigError(fmt::format("goal condition '{}' needs an object", key));
        return condition;
    }
    throw ConfigError(fmt::format("goal condition without a known key: {}", entry.dump()));
}

} // namespace

bool GoalPredicate::holds(const WorldState& world, const std::vector<std::string>& utterances) const
{
    return std::ranges::any_of(anyOf, [&](auto const& conjunction) {
        return std::ranges::all_of(conjunction, [&](auto const& c) {
            auto const result = conditionHolds(c, world, utterances);
            return c.kind == GoalKind::Held && c.value == "false" ? !result : result;
        });
    });
}

GoalPredicate goalFromJson(const nlohmann::json& document)
{
    auto goal = GoalPredicate {};
    if (document.is_null())
        return goal;
    auto parseConjunction = [](const nlohmann::json& list) {
        auto conjunction = std::vector<GoalCondition> {};
        for (auto const& entry: list)
            conjunction.push_back(conditionFromJson(entry));
        return conjunction;
    };
    if (document.contains("any_of"))
    {
        for (auto const& list: document.at("any_of"))
            goal.anyOf.push_back(parseConjunction(list));
    }
    else if (document.contains("all"))
        goal.anyOf.push_back(parseConjunction(document.at("all")));
    else
        throw ConfigError("goal needs 'any_of' or 'all'");
    return goal;
}

nlohmann::json goalToJson(const GoalPredicate& goal)
{
    auto anyOf = nlohmann::json::array();
    for (auto const& conjunction: goal.anyOf)
    {
        auto list = nlohmann::json::array();
        for (auto const& c: conjunction)
        {
            auto entry = nlohmann::json::object();
            entry[std::string(goalKey(c.kind))] = c.kind == GoalKind::Held ? nlohmann::json(c.value != "false") : nlohmann::json(c.value);
            if (!c.object.empty())
                entry["object"] = c.object;
            if (c.side)
                entry["side"] = *c.side;
            list.push_back(std::move(entry));
        }
        anyOf.push_back(std::move(list));
    }
    return { { "any_of", anyOf } };
}

// --- judging -----------------------------------------------------------------

std::vector<SkillCall> GoldVariant::steps() const
{
    auto all = std::vector<SkillCall> {};
    for (auto const& segment: segments)
        all.insert(all.end(), segment.steps.begin(), segment.steps.end());
    return all;
}

namespace
{

std::vector<std::string> utteranceTexts(const MemoryState& memory)
{
    auto texts = std::vector<std::string> {};
    for (auto const& u: memory.utterances)
        texts.push_back(u.text);
    return texts;
}

const Plan* roundZeroPlan(const EpisodeTrace& trace)
{
    if (trace.rounds.empty() || trace.rounds.front().round != 0 || !trace.rounds.front().plan)
        return nullptr;
    return &*trace.rounds.front().plan;
}

// Position of the executed prefix inside one gold variant.
struct Cursor
{
    const GoldVariant* variant = nullptr;
    std::size_t segment = 0;
    std::size_t offset = 0;

    [[nodiscard]] const Plan& current() const { return variant->segments[segment]; }
    [[nodiscard]] bool atPendingEnd() const
    {
        return offset == current().steps.size() && current().terminal == Terminal::Pending
               && segment + 1 < variant->segments.size();
    }

    [[nodiscard]] bool accepts(const Plan& plan) const
    {
        if (plansEquivalent(plan, current().suffix(offset)))
            return true;
        return atPendingEnd() && plansEquivalent(plan, variant->segments[segment + 1]);
    }

    // False when the executed step leaves this variant.
    bool advance(const SkillCall& executed)
    {
        if (atPendingEnd())
        {
            ++segment;
            offset = 0;
        }
        if (offset >= current().steps.size() || !callsEquivalent(current().steps[offset], executed))
            return false;
        ++offset;
        return true;
    }
};

} // namespace

bool planReachesGoal(const Plan& plan, const WorldState& world, const MemoryState& memory, const JudgeContext& judge)
{
    auto const answerer = ScriptedAnswerer(judge.eqa);
    auto simulated = world;
    auto mem = recordPlan(memory, plan);
    for (auto const& step: plan.steps)
    {
        if (!judge.config.hasSkill(step.skill))
            return false;
        auto const observation = observe(simulated, 0);
        auto const eqa = [&](std::string_view query) {
            return answerEqa(std::string(query), mem, observation, judge.task, judge.config, answerer);
        };
        auto result = applySkill(simulated, step, eqa);
        if (!result.outcome.success)
            return false;
        simulated = std::move(result.world);
        mem = recordStep(std::move(mem), step, result.outcome, statusFromWorld(simulated));
    }
    if (plan.terminal == Terminal::Pending)
        return true;
    return judge.goal.holds(simulated, utteranceTexts(mem));
}

Replay replayTrace(const EpisodeTrace& trace, const WorldState& initialWorld)
{
    auto replay = Replay { .world = initialWorld, .memory = freshMemory(initialWorld), .utterances = {} };
    for (auto const& round: trace.rounds)
    {
        if (round.plan)
            replay.memory = recordPlan(std::move(replay.memory), *round.plan);
        if (!round.executed || !round.outcome)
            continue;
        auto const& recorded = *round.outcome;
        if (recorded.success)
        {
            auto const eqa = [&](std::string_view) { return recorded.utterance.value_or(std::string {}); };
            auto result = applySkill(replay.world, *round.executed, eqa);
            if (!result.outcome.success)
                throw std::runtime_error(fmt::format("trace '{}' round {}: {} no longer succeeds",
                                                     trace.episodeId,
                                                     round.round,
                                                     renderCall(*round.executed)));
            replay.world = std::move(result.world);
        }
        replay.memory = recordStep(std::move(replay.memory), *round.executed, recorded, statusFromWorld(replay.world));
        replay.memory = replanOnFailure(round, std::move(replay.memory));
    }
    replay.utterances = utteranceTexts(replay.memory);
    return replay;
}

bool judgeInitialPlan(const EpisodeTrace& trace, const JudgeContext& judge)
{
    auto const* plan = roundZeroPlan(trace);
    if (!plan)
        return false;
    if (judge.mode == JudgeMode::Gold)
    {
        return std::ranges::any_of(judge.gold, [&](auto const& variant) {
            return !variant.segments.empty() && plansEquivalent(*plan, variant.segments.front());
        });
    }
    return planReachesGoal(*plan, judge.initialWorld, freshMemory(judge.initialWorld), judge);
}

StepCount judgeSteps(const EpisodeTrace& trace, const JudgeContext& judge)
{
    auto count = StepCount {};
    if (judge.mode == JudgeMode::Gold)
    {
        auto alive = std::vector<Cursor> {};
        for (auto const& variant: judge.gold)
        {
            if (!variant.segments.empty())
                alive.push_back(Cursor { .variant = &variant });
        }
        for (auto const& round: trace.rounds)
        {
            if (alive.empty())
                break;
            ++count.attempted;
            if (round.plan && std::ranges::any_of(alive, [&](auto const& c) { return c.accepts(*round.plan); }))
                ++count.correct;
            if (round.executed && round.outcome && round.outcome->success)
                std::erase_if(alive, [&](Cursor& c) { return !c.advance(*round.executed); });
        }
        return count;
    }

    auto world = judge.initialWorld;
    auto memory = freshMemory(world);
    for (auto const& round: trace.rounds)
    {
        ++count.attempted;
        if (round.plan && planReachesGoal(*round.plan, world, memory, judge))
            ++count.correct;
        if (round.plan)
            memory = recordPlan(std::move(memory), *round.plan);
        if (!round.executed || !round.outcome)
            continue;
        if (round.outcome->success)
        {
            auto const eqa = [&](std::string_view) { return round.outcome->utterance.value_or(std::string {}); };
            world = applySkill(world, *round.executed, eqa).world;
        }
        memory = recordStep(std::move(memory), *round.executed, *round.outcome, statusFromWorld(world));
        memory = replanOnFailure(round, std::move(memory));
    }
    return count;
}

bool judgeSuccess(const EpisodeTrace& trace, const JudgeContext& judge)
{
    if (trace.verdict.kind != VerdictKind::Completed)
        return false;
    if (judge.mode == JudgeMode::Gold)
    {
        auto executed = std::vector<SkillCall> {};
        for (auto const& round: trace.rounds)
        {
            if (round.executed && round.outcome && round.outcome->success)
                executed.push_back(*round.executed);
        }
        return std::ranges::any_of(judge.gold, [&](auto const& variant) {
            auto const gold = variant.steps();
            return std::ranges::equal(executed, gold, callsEquivalent);
        });
    }
    auto const replay = replayTrace(trace, judge.initialWorld);
    return judge.goal.holds(replay.world, replay.utterances);
}

// --- metrics -----------------------------------------------------------------

std::string formatPercent(const Ratio& ratio)
{
    if (ratio.den == 0)
        return "-";
    auto const scaled = ratio.num * 1000;
    auto tenths = scaled / ratio.den;
    auto const remainder = scaled % ratio.den;
    if (2 * remainder > ratio.den || (2 * remainder == ratio.den && tenths % 2 == 1))
        ++tenths;
    return fmt::format("{}.{}%", tenths / 10, tenths % 10);
}

MetricsTable aggregate(const std::vector<TaskMetrics>& rows, bool includeInferred)
{
    auto table = MetricsTable {};
    table.total.task = "Total";
    for (auto const& row: rows)
    {
        if (row.inferred && !includeInferred)
            continue;
        auto it = std::ranges::find(table.rows, row.task, &TaskMetrics::task);
        if (it == table.rows.end())
            table.rows.push_back(row);
        else
        {
            it->ipsr += row.ipsr;
            it->ssr += row.ssr;
            it->sr += row.sr;
            it->inferred = it->inferred && row.inferred;
        }
        table.total.ipsr += row.ipsr;
        table.total.ssr += row.ssr;
        table.total.sr += row.sr;
    }
    return table;
}

std::string renderMetricsTable(const MetricsTable& table)
{
    auto width = std::size_t { 5 };
    for (auto const& row: table.rows)
        width = std::max(width, row.task.size() + (row.inferred ? 11 : 0));

    auto cell = [](const Ratio& r) { return fmt::format("{}/{} {}", r.num, r.den, formatPercent(r)); };
    auto out = fmt::format("{:<{}}  {:>16}  {:>16}  {:>16}\n", "Task", width, "IPSR", "SSR", "SR");
    auto line = [&](const TaskMetrics& row) {
        auto const name = row.inferred ? row.task + " (inferred)" : row.task;
        out += fmt::format("{:<{}}  {:>16}  {:>16}  {:>16}\n", name, width, cell(row.ipsr), cell(row.ssr), cell(row.sr));
    };
    for (auto const& row: table.rows)
        line(row);
    out += std::string(width + 54, '-') + "\n";
    line(table.total);
    return out;
}

namespace
{

nlohmann::json ratioJson(const Ratio& r)
{
    return { { "num", r.num }, { "den", r.den }, { "percent", formatPercent(r) } };
}

nlohmann::json rowJson(const TaskMetrics& row)
{
    auto out = nlohmann::json {
        { "task", row.task },
        { "ipsr", ratioJson(row.ipsr) },
        { "ssr", ratioJson(row.ssr) },
        { "sr", ratioJson(row.sr) },
    };
    if (row.inferred)
        out["inferred"] = true;
    return out;
}

Ratio ratioFromJson(const nlohmann::json& value)
{
    if (value.is_array())
        return Ratio { value.at(0).get<std::uint64_t>(), value.at(1).get<std::uint64_t>() };
    return Ratio { value.at("num").get<std::uint64_t>(), value.at("den").get<std::uint64_t>() };
}

TaskMetrics rowFromJson(const nlohmann::json& value)
{
    auto row = TaskMetrics {};
    row.task = value.at("task").get<std::string>();
    if (value.contains("ipsr"))
        row.ipsr = ratioFromJson(value.at("ipsr"));
    if (value.contains("ssr"))
        row.ssr = ratioFromJson(value.at("ssr"));
    if (value.contains("sr"))
        row.sr = ratioFromJson(value.at("sr"));
    row.inferred = value.value("inferred", false);
    return row;
}

} // namespace

nlohmann::json metricsToJson(const MetricsTable& table)
{
    auto rows = nlohmann::json::array();
    for (auto const& row: table.rows)
        rows.push_back(rowJson(row));
    return { { "tasks", rows }, { "total", rowJson(table.total) } };
}

MetricsTable metricsFromJson(const nlohmann::json& document)
{
    auto table = MetricsTable {};
    for (auto const& row: document.at("tasks"))
        table.rows.push_back(rowFromJson(row));
    table.total = rowFromJson(document.at("total"));
    return table;
}

namespace
{

nlohmann::json readJsonFile(const std::filesystem::path& path)
{
    auto in = std::ifstream(path);
    if (!in)
        throw ConfigError(fmt::format("cannot open '{}'", path.string()));
    try
    {
        return nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ConfigError(fmt::format("'{}': {}", path.string(), e.what()));
    }
}

} // namespace

std::vector<TaskMetrics> loadBaselineRows(const std::filesystem::path& path, const std::string& method)
{
    auto const document = readJsonFile(path);
    auto const& methods = document.at("methods");
    if (!methods.contains(method))
        throw ConfigError(fmt::format("'{}' has no method '{}'", path.string(), method));
    auto rows = std::vector<TaskMetrics> {};
    for (auto const& row: methods.at(method))
        rows.push_back(rowFromJson(row));
    return rows;
}

// --- suites ------------------------------------------------------------------

std::string slugify(std::string_view name)
{
    auto slug = std::string {};
    for (auto const c: name)
    {
        if (std::isalnum(static_cast<unsigned char>(c)))
            slug += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        else if (!slug.empty() && slug.back() != '-')
            slug += '-';
    }
    while (!slug.empty() && slug.back() == '-')
        slug.pop_back();
    return slug.empty() ? std::string("task") : slug;
}

std::vector<SuiteEpisode> TaskSuite::episodes(std::size_t maxRounds) const
{
    auto all = std::vector<SuiteEpisode> {};
    for (auto t = std::size_t { 0 }; t < tasks.size(); ++t)
    {
        auto const& task = tasks[t];
        for (auto v = std::size_t { 0 }; v < task.variants.size(); ++v)
        {
            for (auto p = std::size_t { 0 }; p < task.paraphrases.size(); ++p)
            {
                auto spec = EpisodeSpec {};
                spec.id = fmt::format("{}-v{}-p{:02}", slugify(task.name), v + 1, p + 1);
                spec.task = task.paraphrases[p];
                spec.scene = task.variants[v].scene;
                spec.config = task.config;
                spec.script = task.script;
                spec.maxRounds = maxRounds;
                all.push_back(SuiteEpisode { .spec = std::move(spec), .taskIndex = t, .variantIndex = v });
            }
        }
    }
    return all;
}

namespace
{

std::string planText(const nlohmann::json& value)
{
    if (value.is_array())
        return join(value.get<std::vector<std::string>>(), "\n");
    return value.get<std::string>();
}

Plan parseGold(const std::string& text, const SkillLibrary& library, const std::string& task)
{
    auto parsed = parsePlan(text, library);
    if (!parsed.ok())
        throw ConfigError(fmt::format("task '{}': gold plan {}", task, formatDiagnostic(parsed.diagnostics().front())));
    return parsed.plan();
}

} // namespace

TaskSuite suiteFromJson(const nlohmann::json& document, const std::filesystem::path& baseDir)
{
    auto const& library = defaultLibrary();
    auto suite = TaskSuite {};
    suite.baseDir = baseDir;
    try
    {
        suite.name = document.value("name", std::string("suite"));
        for (auto const& entry: document.value("tasks", nlohmann::json::array()))
        {
            auto task = SuiteTask {};
            task.name = entry.at("name").get<std::string>();
            task.config = entry.value("config", std::string("humanoid"));
            task.script = goldScriptFromJson(entry.value("script", nlohmann::json::object()));
            task.goal = goalFromJson(entry.value("goal", nlohmann::json()));
            task.paraphrases = entry.at("paraphrases").get<std::vector<std::string>>();
            for (auto const& variantEntry: entry.at("variants"))
            {
                auto variant = SuiteVariant {};
                variant.scene = baseDir / variantEntry.at("scene").get<std::string>();
                for (auto const& alternative: variantEntry.value("gold", nlohmann::json::array()))
                {
                    auto gold = GoldVariant {};
                    for (auto const& segment: alternative)
                        gold.segments.push_back(parseGold(planText(segment), library, task.name));
                    for (auto i = std::size_t { 0 }; i + 1 < gold.segments.size(); ++i)
                    {
                        if (gold.segments[i].terminal != Terminal::Pending)
                            throw ConfigError(fmt::format("task '{}': only the last gold segment may end Done", task.name));
                    }
                    variant.gold.push_back(std::move(gold));
                }
                task.variants.push_back(std::move(variant));
            }
            if (task.variants.empty() || task.paraphrases.empty())
                throw ConfigError(fmt::format("task '{}' has no episodes", task.name));
            suite.tasks.push_back(std::move(task));
        }
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ConfigError(fmt::format("suite: {}", e.what()));
    }
    return suite;
}

TaskSuite loadSuite(const std::filesystem::path& path)
{
    return suiteFromJson(readJsonFile(path), path.parent_path());
}

JudgeContext judgeFor(const TaskSuite& suite, const SuiteEpisode& episode, JudgeMode mode, const SkillLibrary& library)
{
    auto const& task = suite.tasks.at(episode.taskIndex);
    auto const& variant = task.variants.at(episode.variantIndex);
    return JudgeContext {
        .mode = mode,
        .task = episode.spec.task,
        .gold = variant.gold,
        .goal = task.goal,
        .initialWorld = loadSceneFile(variant.scene),
        .config = resolveConfig(task.config, library, suite.baseDir),
        .eqa = task.script.eqa,
    };
}

MetricsTable scoreTraces(const TaskSuite& suite,
                         const std::vector<SuiteEpisode>& episodes,
                         const std::vector<EpisodeTrace>& traces,
                         JudgeMode mode,
                         const SkillLibrary& library)
{
    if (episodes.size() != traces.size())
        throw std::invalid_argument("one trace per episode is required");
    auto rows = std::vector<TaskMetrics> {};
    for (auto const& task: suite.tasks)
        rows.push_back(TaskMetrics { .task = task.name, .ipsr = {}, .ssr = {}, .sr = {}, .inferred = false });
    for (auto i = std::size_t { 0 }; i < episodes.size(); ++i)
    {
        auto const judge = judgeFor(suite, episodes[i], mode, library);
        auto& row = rows.at(episodes[i].taskIndex);
        auto const steps = judgeSteps(traces[i], judge);
        row.ipsr += Ratio { judgeInitialPlan(traces[i], judge) ? 1u : 0u, 1 };
        row.ssr += Ratio { steps.correct, steps.attempted };
        row.sr += Ratio { judgeSuccess(traces[i], judge) ? 1u : 0u, 1 };
    }
    return aggregate(rows);
}

SuiteRun runSuite(const TaskSuite& suite, const BackendFactory& factory, const SkillLibrary& library, const SuiteOptions& options)
{
    auto run = SuiteRun {};
    run.episodes = suite.episodes(options.maxRounds);
    run.traces.resize(run.episodes.size());

    auto backends = std::vector<std::shared_ptr<Backend>> {};
    auto concurrent = true;
    for (auto const& episode: run.episodes)
    {
        backends.push_back(factory(episode, suite));
        concurrent = concurrent && backends.back()->concurrentSafe();
    }

    auto next = std::atomic<std::size_t> { 0 };
    auto errorMutex = std::mutex {};
    auto firstError = std::exception_ptr {};
    auto worker = [&] {
        for (auto i = next++; i < run.episodes.size(); i = next++)
        {
            try
            {
                auto const& episode = run.episodes[i];
                auto const& task = suite.tasks.at(episode.taskIndex);
                auto const world = loadSceneFile(episode.spec.scene);
                auto const config = resolveConfig(task.config, library, suite.baseDir);
                auto const answerer = ScriptedAnswerer(task.script.eqa);
                run.traces[i] = runEpisode(episode.spec, *backends[i], library, config, world, answerer, options.executor).trace;
            }
            catch (...)
            {
                auto lock = std::lock_guard(errorMutex);
                if (!firstError)
                    firstError = std::current_exception();
            }
        }
    };

    auto const threads = concurrent ? std::clamp<std::size_t>(options.parallel, 1, std::max<std::size_t>(run.episodes.size(), 1)) : 1;
    if (threads <= 1)
        worker();
    else
    {
        auto pool = std::vector<std::jthread> {};
        for (auto i = std::size_t { 0 }; i < threads; ++i)
            pool.emplace_back(worker);
    }
    if (firstError)
        std::rethrow_exception(firstError);

    run.metrics = scoreTraces(suite, run.episodes, run.traces, options.judge, library);

    if (options.outDir)
    {
        for (auto i = std::size_t { 0 }; i < run.episodes.size(); ++i)
            writeTraceFile(*options.outDir / "traces" / (run.episodes[i].spec.id + ".jsonl"), run.traces[i]);
        auto out = std::ofstream(*options.outDir / "metrics.json", std::ios::trunc);
        out << metricsToJson(run.metrics).dump(2) << "\n";
    }
    return run;
}

MetricsTable recomputeMetrics(const TaskSuite& suite,
                              const std::filesystem::path& traceDir,
                              JudgeMode mode,
                              const SkillLibrary& library,
                              std::size_t maxRounds)
{
    auto const episodes = suite.episodes(maxRounds);
    auto traces = std::vector<EpisodeTrace> {};
    for (auto const& episode: episodes)
        traces.push_back(readTraceFile(traceDir / (episode.spec.id + ".jsonl"), library));
    return scoreTraces(suite, episodes, traces, mode, library);
}

} // namespace relep
