// SPDX-License-Identifier: Apache-2.0
#include <relep/skill_library.hpp>
#include <relep/text.hpp>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>

namespace relep
{

std::string_view toString(ArgRole role) noexcept
{
    switch (role)
    {
        case ArgRole::Object: return "object";
        case ArgRole::Destination: return "destination";
        case ArgRole::Query: return "query";
        case ArgRole::Integer: return "integer";
        case ArgRole::Direction: return "direction";
        case ArgRole::Place: return "place";
        case ArgRole::Side: return "side";
    }
    return "object";
}

bool SkillSpec::acceptsDirection(std::string_view direction) const
{
    if (!directionDomain)
        return false;
    return std::find(directionDomain->begin(), directionDomain->end(), direction) != directionDomain->end();
}

std::string SkillSpec::signature() const
{
    auto roles = std::vector<std::string> {};
    for (auto const role: argRoles)
        roles.emplace_back(toString(role));
    return fmt::format("{}({})", name, join(roles, ", "));
}

SkillLibrary::SkillLibrary(std::vector<SkillSpec> specs): _specs(std::move(specs))
{
    for (auto i = std::size_t { 0 }; i < _specs.size(); ++i)
    {
        auto const& spec = _specs[i];
        if (spec.name.empty())
            throw ConfigError("skill with empty name");
        for (auto j = std::size_t { 0 }; j < i; ++j)
        {
            if (iequals(_specs[j].name, spec.name))
                throw ConfigError(fmt::format("duplicate skill '{}'", spec.name));
        }
        auto const hasDirection =
            std::find(spec.argRoles.begin(), spec.argRoles.end(), ArgRole::Direction) != spec.argRoles.end();
        if (hasDirection != spec.directionDomain.has_value())
            throw ConfigError(fmt::format("skill '{}': direction domain must be present iff a direction argument is",
                                          spec.name));
    }
}

const SkillSpec* SkillLibrary::find(std::string_view name) const
{
    auto const it =
        std::find_if(_specs.begin(), _specs.end(), [&](const SkillSpec& spec) { return iequals(spec.name, name); });
    return it == _specs.end() ? nullptr : &*it;
}

std::size_t SkillLibrary::interactiveCount() const
{
    return static_cast<std::size_t>(
        std::count_if(_specs.begin(), _specs.end(), [](const SkillSpec& spec) { return spec.interactive; }));
}

const SkillLibrary& defaultLibrary()
{
    using enum ArgRole;
    static auto const library = SkillLibrary({
        { "Detect", { Object }, std::nullopt, false, "Detect someone or something referred in the task." },
        { "Speak", { Query }, std::nullopt, false, "Communicate with the user by saying the query." },
        { "EQA", { Query }, std::nullopt, false, "Embodied question answering, return the answer to the query." },
        { "Wait", { Integer }, std::nullopt, false, "Wait for integer seconds." },
        { "Grasp", { Object }, std::nullopt, true, "Grasp the object." },
        { "Navigate", { Destination }, std::nullopt, true, "Navigate to destination." },
        { "Pull",
          { Object, Direction },
          std::vector<std::string> { "up", "down", "left", "right", "backward" },
          true,
          "Pull object in one of the following directions:up, down, left, right, backward." },
        { "Push",
          { Object, Direction },
          std::vector<std::string> { "up", "down", "left", "right", "forward" },
          true,
          "Push object in one of the following directions:up, down, left, right, forward." },
        { "Put", { Object, Place, Side }, std::nullopt, true, "Put the object on the side of the place." },
    });
    return library;
}

// --- robot configurations ----------------------------------------------------

bool RobotConfig::hasSkill(std::string_view skill) const
{
    return std::any_of(availableSkills.begin(), availableSkills.end(), [&](const std::string& s) {
        return iequals(s, skill);
    });
}

void validateConfig(const RobotConfig& config, const SkillLibrary& library)
{
    if (config.name.empty())
        throw ConfigError("robot config has an empty name");
    if (config.armCount < 0 || config.armCount > 2)
        throw ConfigError(fmt::format("robot config '{}': arm_count must be 0..2, got {}", config.name, config.armCount));
    for (auto const& skill: config.availableSkills)
    {
        auto const* spec = library.find(skill);
        if (spec == nullptr)
            throw ConfigError(fmt::format("robot config '{}': unknown skill '{}'", config.name, skill));
        if (spec->name != skill)
            throw ConfigError(fmt::format("robot config '{}': skill '{}' must be spelled '{}'", config.name, skill, spec->name));
    }
    if (config.armCount == 0 && (config.hasSkill("Grasp") || config.hasSkill("Put")))
        throw ConfigError(fmt::format("robot config '{}': a robot without arms cannot Grasp or Put", config.name));
    if (!config.mobile && config.hasSkill("Navigate"))
        throw ConfigError(fmt::format("robot config '{}': an immobile robot cannot Navigate", config.name));
}

namespace
{
std::set<std::string> allSkills(const SkillLibrary& library)
{
    auto names = std::set<std::string> {};
    for (auto const& spec: library.specs())
        names.insert(spec.name);
    return names;
}
} // namespace

RobotConfig humanoidConfig()
{
    return RobotConfig {
        .name = "humanoid",
        .armCount = 2,
        .mobile = true,
        .availableSkills = allSkills(defaultLibrary()),
        .description = "A humanoid robot with two arms and a mobile base. "
                       "It can hold one object in each hand, so two objects at a time.",
    };
}

RobotConfig singleArmConfig()
{
    return RobotConfig {
        .name = "single_arm",
        .armCount = 1,
        .mobile = true,
        .availableSkills = allSkills(defaultLibrary()),
        .description = "A single-armed mobile robot. "
                       "It can hold only one object at a time and must put it down before grasping another.",
    };
}

RobotConfig quadrupedConfig()
{
    auto skills = allSkills(defaultLibrary());
    skills.erase("Grasp");
    skills.erase("Put");
    return RobotConfig {
        .name = "quadruped",
        .armCount = 0,
        .mobile = true,
        .availableSkills = std::move(skills),
        .description = "A quadruped robot dog with no robot arm. "
                       "It can walk and push or pull with its body, but it cannot grasp or put objects.",
    };
}

std::vector<RobotConfig> bundledConfigs()
{
    return { humanoidConfig(), singleArmConfig(), quadrupedConfig() };
}

RobotConfig configFromJson(const nlohmann::json& document, const SkillLibrary& library)
{
    auto config = RobotConfig {};
    try
    {
        config.name = document.at("name").get<std::string>();
        config.armCount = document.at("arm_count").get<int>();
        config.mobile = document.at("mobile").get<bool>();
        for (auto const& skill: document.at("available_skills"))
            config.availableSkills.insert(skill.get<std::string>());
        config.description = document.at("description").get<std::string>();
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ConfigError(fmt::format("malformed robot config: {}", e.what()));
    }
    validateConfig(config, library);
    return config;
}

nlohmann::json configToJson(const RobotConfig& config)
{
    return nlohmann::json {
        { "name", config.name },
        { "arm_count", config.armCount },
        { "mobile", config.mobile },
        { "available_skills", config.availableSkills },
        { "description", config.description },
    };
}

RobotConfig loadConfigFile(const std::filesystem::path& path, const SkillLibrary& library)
{
    auto in = std::ifstream(path);
    if (!in)
        throw ConfigError(fmt::format("cannot open robot config '{}'", path.string()));
    auto document = nlohmann::json::parse(in, nullptr, false);
    if (document.is_discarded())
        throw ConfigError(fmt::format("robot config '{}' is not valid JSON", path.string()));
    return configFromJson(document, library);
}

RobotConfig resolveConfig(std::string_view nameOrPath, const SkillLibrary& library, const std::filesystem::path& baseDir)
{
    for (auto& config: bundledConfigs())
    {
        if (config.name == nameOrPath)
            return config;
    }
    auto path = std::filesystem::path(std::string(nameOrPath));
    if (path.is_relative() && !baseDir.empty())
        path = baseDir / path;
    if (path.extension() == ".json")
        return loadConfigFile(path, library);
    throw ConfigError(fmt::format("unknown robot config '{}'", nameOrPath));
}

// --- legality ----------------------------------------------------------------

std::string_view toString(ViolationKind kind) noexcept
{
    switch (kind)
    {
        case ViolationKind::SkillUnavailable: return "skill-unavailable";
        case ViolationKind::NoFreeHand: return "no-free-hand";
        case ViolationKind::NothingHeld: return "nothing-held";
        case ViolationKind::AlreadyHeld: return "already-held";
        case ViolationKind::NotHeld: return "not-held";
    }
    return "skill-unavailable";
}

namespace
{

// Hand bookkeeping: named objects we know are held, plus hands holding something unnamed.
struct HandLedger
{
    std::vector<std::string> held;
    int unnamedHeld = 0;
    int freeHands = 0;

    [[nodiscard]] int occupied() const { return static_cast<int>(held.size()) + unnamedHeld; }
};

std::vector<LegalityViolation> runLegality(const Plan& plan, const RobotConfig& config, HandLedger hands)
{
    auto violations = std::vector<LegalityViolation> {};
    for (auto i = std::size_t { 0 }; i < plan.steps.size(); ++i)
    {
        auto const& step = plan.steps[i];
        auto const index = i + 1;
        auto report = [&](ViolationKind kind, std::string message) {
            violations.push_back(LegalityViolation { .step = index, .kind = kind, .message = std::move(message) });
        };

        if (!config.hasSkill(step.skill))
        {
            report(ViolationKind::SkillUnavailable,
                   fmt::format("{} is not available to the {} robot", step.skill, config.name));
            continue;
        }

        if (iequals(step.skill, "Grasp") && !step.args.empty())
        {
            auto const object = normalizeReference(step.args[0]);
            if (std::find(hands.held.begin(), hands.held.end(), object) != hands.held.end())
                report(ViolationKind::AlreadyHeld, fmt::format("'{}' is already held", step.args[0]));
            else if (hands.freeHands == 0)
                report(ViolationKind::NoFreeHand,
                       fmt::format("Grasp({}) needs a free hand but all {} are occupied", step.args[0], config.armCount));
            else
            {
                --hands.freeHands;
                hands.held.push_back(object);
            }
        }
        else if (iequals(step.skill, "Put") && !step.args.empty())
        {
            auto const object = normalizeReference(step.args[0]);
            auto const it = std::find(hands.held.begin(), hands.held.end(), object);
            if (hands.occupied() == 0)
                report(ViolationKind::NothingHeld, fmt::format("Put({}) with empty hands", step.args[0]));
            else if (it != hands.held.end())
            {
                hands.held.erase(it);
                ++hands.freeHands;
            }
            else if (hands.unnamedHeld > 0)
            {
                --hands.unnamedHeld;
                ++hands.freeHands;
            }
            else
                report(ViolationKind::NotHeld, fmt::format("Put({}) but '{}' is not held", step.args[0], step.args[0]));
        }
    }
    return violations;
}

} // namespace

std::vector<LegalityViolation> checkLegality(const Plan& plan, const RobotConfig& config, int initialFreeHands)
{
    if (initialFreeHands < 0 || initialFreeHands > config.armCount)
        throw std::invalid_argument(
            fmt::format("initial free hands {} outside 0..{}", initialFreeHands, config.armCount));
    return runLegality(plan,
                       config,
                       HandLedger { .held = {}, .unnamedHeld = config.armCount - initialFreeHands, .freeHands = initialFreeHands });
}

std::vector<LegalityViolation> checkLegality(const Plan& plan,
                                             const RobotConfig& config,
                                             const std::vector<std::optional<std::string>>& hands)
{
    if (static_cast<int>(hands.size()) != config.armCount)
        throw std::invalid_argument(fmt::format("{} hand slots for a {}-armed robot", hands.size(), config.armCount));
    auto ledger = HandLedger {};
    for (auto const& hand: hands)
    {
        if (hand)
            ledger.held.push_back(normalizeReference(*hand));
        else
            ++ledger.freeHands;
    }
    return runLegality(plan, config, std::move(ledger));
}

std::string formatViolation(const LegalityViolation& violation)
{
    return fmt::format("step {}: {}: {}", violation.step, toString(violation.kind), violation.message);
}

// --- prompt rendering --------------------------------------------------------

std::string renderSkillSection(const SkillLibrary& library, const RobotConfig& config)
{
    auto out = std::string("Skill Library:\n");
    for (auto const& spec: library.specs())
    {
        if (!config.hasSkill(spec.name))
            continue;
        out += fmt::format("- {}: {}\n", spec.signature(), spec.description);
    }
    out += "End every plan with Done if the task can be completed with the information so far, "
           "or Pending if planning must wait for a future observation.";
    return out;
}

std::string renderConfigSection(const RobotConfig& config)
{
    return fmt::format("Robot Configuration:\n{}", config.description);
}

std::string renderLibraryPrompt(const SkillLibrary& library, const RobotConfig& config)
{
    return renderSkillSection(library, config) + "\n\n" + renderConfigSection(config);
}

} // namespace relep
