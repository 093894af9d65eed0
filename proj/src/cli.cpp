// SPDX-License-Identifier: Apache-2.0
#include <relep/cli.hpp>
#include <relep/datagen.hpp>
#include <relep/eval.hpp>
#include <relep/executor.hpp>
#include <relep/text.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace relep
{
namespace
{

constexpr std::string_view RemoteUrlVariable = "RELEP_REMOTE_URL";

std::string readFile(const std::filesystem::path& path)
{
    auto in = std::ifstream(path, std::ios::binary);
    if (!in)
        throw ConfigError(fmt::format("cannot open '{}'", path.string()));
    auto buffer = std::stringstream {};
    buffer << in.rdbuf();
    return buffer.str();
}

nlohmann::json readJsonFile(const std::filesystem::path& path)
{
    try
    {
        return nlohmann::json::parse(readFile(path));
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ConfigError(fmt::format("'{}': {}", path.string(), e.what()));
    }
}

// Backend selection: oracle | amnesic:<backend> | remote[:URL] | replay:DIR.
struct BackendChoice
{
    std::string spec = "oracle";
    std::optional<std::filesystem::path> record;
    std::optional<std::filesystem::path> replay;
    std::int64_t timeoutMs = HttpTransport::DefaultTimeout.count();
};

std::string remoteUrl(std::string_view fromSpec)
{
    if (auto const* env = std::getenv(std::string(RemoteUrlVariable).c_str()); env && *env)
        return env;
    if (fromSpec.empty())
        throw ConfigError(fmt::format("remote backend needs a URL (remote:URL or {})", RemoteUrlVariable));
    return std::string(fromSpec);
}

std::shared_ptr<Backend> makeBackend(std::string_view spec, const BackendChoice& choice, const std::optional<GoldScript>& script)
{
    if (spec == "oracle")
    {
        if (!script)
            throw ConfigError("the oracle backend needs an episode with a gold script");
        return std::make_shared<ScriptedOracle>(*script);
    }
    if (spec.starts_with("amnesic:"))
        return std::make_shared<AmnesicBackend>(makeBackend(spec.substr(8), choice, script));
    if (spec == "remote" || spec.starts_with("remote:"))
    {
        auto const url = remoteUrl(spec == "remote" ? std::string_view {} : spec.substr(7));
        return std::make_shared<RemoteBackend>(HttpTransport(url, std::chrono::milliseconds(choice.timeoutMs)));
    }
    if (spec.starts_with("replay:"))
        return std::make_shared<ReplayBackend>(ReplayCache(std::string(spec.substr(7))));
    throw ConfigError(fmt::format("unknown backend '{}'", spec));
}

std::shared_ptr<Backend> selectBackend(const BackendChoice& choice, const std::optional<GoldScript>& script)
{
    if (choice.replay && choice.record)
        throw ConfigError("--record and --replay are exclusive");
    if (choice.replay)
        return std::make_shared<ReplayBackend>(ReplayCache(*choice.replay));
    auto backend = makeBackend(choice.spec, choice, script);
    if (choice.record)
        return std::make_shared<RecordingBackend>(std::move(backend), ReplayCache(*choice.record));
    return backend;
}

void addBackendOptions(CLI::App& command, BackendChoice& choice)
{
    command.add_option("--backend", choice.spec, "oracle | amnesic:<backend> | remote[:URL] | replay:DIR")->capture_default_str();
    command.add_option("--record", choice.record, "record raw planner replies into this cache directory");
    command.add_option("--replay", choice.replay, "serve planner replies from this cache directory");
    command.add_option("--timeout-ms", choice.timeoutMs, "remote request timeout")->capture_default_str();
}

EpisodeSpec loadEpisodeFile(const std::filesystem::path& path)
{
    auto const doc = readJsonFile(path);
    auto const base = path.parent_path();
    auto spec = EpisodeSpec {};
    try
    {
        spec.id = doc.value("id", path.stem().string());
        spec.task = doc.at("task").get<std::string>();
        spec.scene = base / doc.at("scene").get<std::string>();
        spec.config = doc.value("config", std::string("humanoid"));
        if (doc.contains("script"))
            spec.script = goldScriptFromJson(doc.at("script"));
        else if (doc.contains("script_file"))
            spec.script = goldScriptFromJson(readJsonFile(base / doc.at("script_file").get<std::string>()));
        spec.maxRounds = doc.value("max_rounds", DefaultMaxRounds);
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ConfigError(fmt::format("episode '{}': {}", path.string(), e.what()));
    }
    return spec;
}

// --- commands ----------------------------------------------------------------

int cmdValidate(const std::filesystem::path& file, const std::string& configName, std::optional<int> freeHands, std::ostream& out)
{
    auto const& library = defaultLibrary();
    auto const config = resolveConfig(configName, library);
    auto const text = readFile(file);
    auto const parsed = parsePlan(text, library);
    if (!parsed.ok())
    {
        for (auto const& d: parsed.diagnostics())
            out << file.string() << ": " << formatDiagnostic(d) << "\n";
        return ExitDataFailure;
    }
    auto const violations = checkLegality(parsed.plan(), config, freeHands.value_or(config.armCount));
    for (auto const& v: violations)
        out << file.string() << ": " << formatViolation(v) << "\n";
    return violations.empty() ? ExitOk : ExitDataFailure;
}

int cmdRun(const std::optional<std::filesystem::path>& episodeFile,
           const std::optional<std::filesystem::path>& suiteFile,
           const std::string& episodeId,
           const BackendChoice& choice,
           const std::filesystem::path& outDir,
           std::optional<std::size_t> maxRounds,
           std::ostream& out)
{
    auto const& library = defaultLibrary();
    auto spec = EpisodeSpec {};
    auto eqa = std::vector<EqaTemplate> {};
    auto configBase = std::filesystem::path {};
    if (episodeFile)
    {
        spec = loadEpisodeFile(*episodeFile);
        configBase = episodeFile->parent_path();
    }
    else if (suiteFile)
    {
        auto const suite = loadSuite(*suiteFile);
        auto const episodes = suite.episodes();
        auto const it = std::ranges::find(episodes, episodeId, [](auto const& e) { return e.spec.id; });
        if (it == episodes.end())
            throw ConfigError(fmt::format("suite has no episode '{}'", episodeId));
        spec = it->spec;
        configBase = suite.baseDir;
    }
    else
        throw ConfigError("run needs --episode or --suite with --id");
    if (maxRounds)
        spec.maxRounds = *maxRounds;
    if (spec.script)
        eqa = spec.script->eqa;
    validateEpisode(spec);

    auto const world = loadSceneFile(spec.scene);
    auto const config = resolveConfig(spec.config, library, configBase);
    auto backend = selectBackend(choice, spec.script);
    auto const answerer = ScriptedAnswerer(eqa);
    auto const run = runEpisode(spec, *backend, library, config, world, answerer);

    auto const tracePath = outDir / "traces" / (spec.id + ".jsonl");
    writeTraceFile(tracePath, run.trace);
    for (auto const& round: run.trace.rounds)
    {
        out << fmt::format("round {}: ", round.round);
        if (round.executed && round.outcome)
        {
            out << renderCall(*round.executed) << " -> "
                << (round.outcome->success ? std::string("ok") : std::string(toString(*round.outcome->failureReason)));
            if (round.outcome->utterance)
                out << " \"" << *round.outcome->utterance << "\"";
        }
        else if (round.plan)
            out << toString(round.plan->terminal);
        else
            out << "no plan";
        out << "\n";
    }
    out << "verdict: " << toString(run.trace.verdict.kind);
    if (!run.trace.verdict.reason.empty())
        out << " (" << run.trace.verdict.reason << ")";
    out << "\ntrace: " << tracePath.string() << "\n";
    return ExitOk;
}

int cmdSuite(const std::filesystem::path& suiteFile,
             const BackendChoice& choice,
             const std::filesystem::path& outDir,
             std::optional<std::size_t> maxRounds,
             std::size_t parallel,
             const std::string& judge,
             std::ostream& out)
{
    auto const& library = defaultLibrary();
    auto const suite = loadSuite(suiteFile);
    auto options = SuiteOptions {};
    options.judge = judgeModeFromString(judge);
    options.maxRounds = maxRounds.value_or(DefaultMaxRounds);
    options.parallel = parallel;
    options.outDir = outDir;
    if (options.maxRounds == 0)
        throw ConfigError("--max-rounds must be at least 1");

    // Fail on a bad backend selection before any episode runs.
    if (!suite.tasks.empty())
        (void) selectBackend(choice, suite.tasks.front().script);
    auto const factory = [&](const SuiteEpisode& episode, const TaskSuite&) { return selectBackend(choice, episode.spec.script); };
    auto const run = runSuite(suite, factory, library, options);
    out << renderMetricsTable(run.metrics);
    out << fmt::format("episodes: {}, traces: {}, metrics: {}\n",
                       run.episodes.size(),
                       (outDir / "traces").string(),
                       (outDir / "metrics.json").string());
    return ExitOk;
}

int cmdMetrics(const std::optional<std::filesystem::path>& suiteFile,
               const std::optional<std::filesystem::path>& traceDir,
               const std::optional<std::filesystem::path>& baseline,
               const std::string& method,
               bool excludeInferred,
               const std::string& judge,
               std::ostream& out)
{
    if (baseline)
    {
        auto const rows = loadBaselineRows(*baseline, method);
        out << renderMetricsTable(aggregate(rows, !excludeInferred));
        return ExitOk;
    }
    if (!suiteFile || !traceDir)
        throw ConfigError("metrics needs --suite and --traces, or --baseline");
    auto const suite = loadSuite(*suiteFile);
    out << renderMetricsTable(recomputeMetrics(suite, *traceDir, judgeModeFromString(judge), defaultLibrary()));
    return ExitOk;
}

std::unique_ptr<Generator> selectGenerator(const std::string& spec, std::int64_t timeoutMs)
{
    if (spec == "remote" || spec.starts_with("remote:"))
    {
        auto const url = remoteUrl(spec == "remote" ? std::string_view {} : std::string_view(spec).substr(7));
        return std::make_unique<RemoteGenerator>(HttpTransport(url, std::chrono::milliseconds(timeoutMs)));
    }
    if (spec.empty())
        throw ConfigError("--generator is required (a fixture file or remote[:URL])");
    return std::make_unique<ScriptedGenerator>(ScriptedGenerator::fromFile(spec));
}

struct DatagenArgs
{
    std::optional<std::filesystem::path> store;
    std::filesystem::path out = "out";
    std::string generator;
    std::int64_t timeoutMs = HttpTransport::DefaultTimeout.count();
    std::vector<std::string> scenes;
    std::vector<std::string> tasks;
    std::size_t count = DefaultTaskCount;
    std::filesystem::path decisions;
};

std::filesystem::path storeIn(const DatagenArgs& args)
{
    return args.store.value_or(args.out);
}

int cmdDatagen(const std::string& sub, const DatagenArgs& args, std::ostream& out)
{
    auto const& library = defaultLibrary();
    auto store = Store::load(storeIn(args), library);

    if (sub == "tasks")
    {
        auto generator = selectGenerator(args.generator, args.timeoutMs);
        auto scenes = args.scenes;
        if (scenes.empty())
        {
            for (auto const& [id, scene]: store.scenes)
            {
                if (scene.status == RecordStatus::Accepted)
                    scenes.push_back(id);
            }
        }
        for (auto const& id: scenes)
        {
            auto const ids = generateTasks(store, id, *generator, args.count);
            out << fmt::format("{}: {} proposals\n", id, ids.size());
        }
        store.save(args.out);
        return ExitOk;
    }
    if (sub == "plans")
    {
        auto generator = selectGenerator(args.generator, args.timeoutMs);
        auto tasks = args.tasks;
        if (tasks.empty())
        {
            for (auto const& [id, task]: store.tasks)
            {
                if (task.status != RecordStatus::Rejected && !store.triplets.contains(id))
                    tasks.push_back(id);
            }
        }
        auto exit = ExitOk;
        for (auto const& id: tasks)
        {
            auto const& triplet = generatePlan(store, id, *generator, library);
            out << fmt::format("{}: {}\n", id, triplet.diagnostics.empty() ? std::string("ok") : triplet.diagnostics.front());
        }
        store.save(args.out);
        return exit;
    }
    if (sub == "review")
    {
        auto const report = reviewApply(store, readJsonFile(args.decisions), library);
        for (auto const& line: report.refused)
            out << "refused " << line << "\n";
        out << fmt::format("applied {} decisions\n", report.applied);
        store.save(args.out);
        return report.refused.empty() ? ExitOk : ExitDataFailure;
    }
    if (sub == "expand")
    {
        auto counts = ExpansionCounts {};
        (void) expandStore(store, library, &counts);
        out << fmt::format("triplets: {}\ninitial: {}\nsequential: {}\n", counts.triplets, counts.initial, counts.sequential);
        if (counts.initial > 0)
            out << fmt::format("ratio: {}/{} = {:.2f}\n",
                               counts.sequential,
                               counts.initial,
                               static_cast<double>(counts.sequential) / static_cast<double>(counts.initial));
        return ExitOk;
    }
    // export
    auto const path = args.out / "dialogues.jsonl";
    auto const report = exportDialogues(store, library, path);
    out << (report.changed ? fmt::format("wrote {} records to {}\n", report.records, path.string())
                           : fmt::format("unchanged: {} ({} records)\n", path.string(), report.records));
    return ExitOk;
}

} // namespace

int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    auto app = CLI::App("Long-horizon embodied planning: plan validation, episode runs, suite evaluation and datagen.", "relep");
    app.require_subcommand(1);

    auto* validate = app.add_subcommand("validate", "parse a plan file and check it against a robot configuration");
    auto planFile = std::filesystem::path {};
    auto configName = std::string("humanoid");
    auto freeHands = std::optional<int> {};
    validate->add_option("plan", planFile, "plan file")->required();
    validate->add_option("--config", configName, "bundled config name or config file")->capture_default_str();
    validate->add_option("--free-hands", freeHands, "free hands at the start (default: all)");

    auto choice = BackendChoice {};
    auto outDir = std::filesystem::path("out");
    auto maxRounds = std::optional<std::size_t> {};
    auto judge = std::string("gold");

    auto* run = app.add_subcommand("run", "run one episode");
    auto episodeFile = std::optional<std::filesystem::path> {};
    auto suiteFile = std::optional<std::filesystem::path> {};
    auto episodeId = std::string {};
    run->add_option("--episode", episodeFile, "episode file");
    run->add_option("--suite", suiteFile, "suite file (with --id)");
    run->add_option("--id", episodeId, "episode id inside the suite");
    run->add_option("--out", outDir, "output directory")->capture_default_str();
    run->add_option("--max-rounds", maxRounds, "round limit");
    addBackendOptions(*run, choice);

    auto* suite = app.add_subcommand("suite", "run a task suite and report IPSR, SSR and SR");
    auto suitePath = std::filesystem::path {};
    auto parallel = std::size_t { 1 };
    suite->add_option("--suite", suitePath, "suite file")->required();
    suite->add_option("--out", outDir, "output directory")->capture_default_str();
    suite->add_option("--max-rounds", maxRounds, "round limit per episode");
    suite->add_option("--parallel", parallel, "episodes run concurrently")->capture_default_str();
    suite->add_option("--judge", judge, "gold | goal")->capture_default_str();
    addBackendOptions(*suite, choice);

    auto* metrics = app.add_subcommand("metrics", "rescore persisted traces or aggregate baseline rows");
    auto metricsSuite = std::optional<std::filesystem::path> {};
    auto traceDir = std::optional<std::filesystem::path> {};
    auto baseline = std::optional<std::filesystem::path> {};
    auto method = std::string {};
    auto excludeInferred = false;
    metrics->add_option("--suite", metricsSuite, "suite file");
    metrics->add_option("--traces", traceDir, "directory of <episode id>.jsonl traces");
    metrics->add_option("--judge", judge, "gold | goal")->capture_default_str();
    metrics->add_option("--baseline", baseline, "baseline rows file");
    metrics->add_option("--method", method, "method inside the baseline file");
    metrics->add_flag("--exclude-inferred", excludeInferred, "leave out rows marked inferred");

    auto* datagen = app.add_subcommand("datagen", "dataset pipeline over a store directory");
    datagen->require_subcommand(1);
    auto dg = DatagenArgs {};
    auto addStoreOptions = [&](CLI::App* command) {
        command->add_option("--store", dg.store, "input store (default: --out)");
        command->add_option("--out", dg.out, "output directory")->capture_default_str();
    };
    auto* dgTasks = datagen->add_subcommand("tasks", "propose tasks for accepted scenes");
    addStoreOptions(dgTasks);
    dgTasks->add_option("--generator", dg.generator, "fixture file or remote[:URL]")->required();
    dgTasks->add_option("--scene", dg.scenes, "scene ids (default: all accepted)");
    dgTasks->add_option("-n,--count", dg.count, "proposals per scene")->capture_default_str();
    dgTasks->add_option("--timeout-ms", dg.timeoutMs, "remote request timeout");
    auto* dgPlans = datagen->add_subcommand("plans", "generate plans for tasks");
    addStoreOptions(dgPlans);
    dgPlans->add_option("--generator", dg.generator, "fixture file or remote[:URL]")->required();
    dgPlans->add_option("--task", dg.tasks, "task ids (default: all without a triplet)");
    dgPlans->add_option("--timeout-ms", dg.timeoutMs, "remote request timeout");
    auto* dgReview = datagen->add_subcommand("review", "apply a decisions file");
    addStoreOptions(dgReview);
    dgReview->add_option("--decisions", dg.decisions, "decisions file")->required();
    auto* dgExpand = datagen->add_subcommand("expand", "count initial and sequential examples");
    addStoreOptions(dgExpand);
    auto* dgExport = datagen->add_subcommand("export", "write dialogues.jsonl under --out");
    addStoreOptions(dgExport);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp&)
    {
        out << app.help();
        return ExitOk;
    }
    catch (const CLI::CallForAllHelp&)
    {
        out << app.help("", CLI::AppFormatMode::All);
        return ExitOk;
    }
    catch (const CLI::ParseError& e)
    {
        err << "relep: " << e.what() << "\n";
        return ExitConfigError;
    }

    try
    {
        if (*validate)
            return cmdValidate(planFile, configName, freeHands, out);
        if (*run)
            return cmdRun(episodeFile, suiteFile, episodeId, choice, outDir, maxRounds, out);
        if (*suite)
            return cmdSuite(suitePath, choice, outDir, maxRounds, parallel, judge, out);
        if (*metrics)
            return cmdMetrics(metricsSuite, traceDir, baseline, method, excludeInferred, judge, out);
        for (auto const* sub: datagen->get_subcommands())
            return cmdDatagen(sub->get_name(), dg, out);
    }
    catch (const ConfigError& e)
    {
        err << "relep: " << e.what() << "\n";
        return ExitConfigError;
    }
    catch (const SceneError& e)
    {
        err << "relep: scene: " << e.what() << "\n";
        return ExitConfigError;
    }
    catch (const DataError& e)
    {
        err << "relep: " << e.what() << "\n";
        return ExitDataFailure;
    }
    catch (const BackendError& e)
    {
        err << "relep: backend: " << e.what() << "\n";
        return ExitDataFailure;
    }
    catch (const std::exception& e)
    {
        err << "relep: " << e.what() << "\n";
        return ExitDataFailure;
    }
    return ExitConfigError;
}

} // namespace relep
