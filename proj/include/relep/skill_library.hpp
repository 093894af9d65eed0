// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relep/plan_dsl.hpp>

#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace relep
{

enum class ArgRole
{
    Object,
    Destination,
    Query,
    Integer,
    Direction,
    Place,
    Side,
};

[[nodiscard]] std::string_view toString(ArgRole role) noexcept;

struct SkillSpec
{
    std::string name;
    std::vector<ArgRole> argRoles;
    std::optional<std::vector<std::string>> directionDomain;
    bool interactive = false;
    std::string description;

    [[nodiscard]] std::size_t arity() const noexcept { return argRoles.size(); }
    [[nodiscard]] bool acceptsDirection(std::string_view direction) const;
    /// `Put(object, place, side)`
    [[nodiscard]] std::string signature() const;
};

class ConfigError: public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class SkillLibrary
{
  public:
    /// Throws ConfigError on duplicate names or a direction role without a domain (or vice versa).
    explicit SkillLibrary(std::vector<SkillSpec> specs);

    /// Case-insensitive lookup; nullptr when absent.
    [[nodiscard]] const SkillSpec* find(std::string_view name) const;
    [[nodiscard]] bool contains(std::string_view name) const { return find(name) != nullptr; }

    [[nodiscard]] const std::vector<SkillSpec>& specs() const noexcept { return _specs; }
    [[nodiscard]] std::size_t size() const noexcept { return _specs.size(); }
    [[nodiscard]] std::size_t interactiveCount() const;

  private:
    std::vector<SkillSpec> _specs;
};

/// The nine-skill library: Detect, Speak, EQA, Wait (non-interactive) and
/// Grasp, Navigate, Pull, Push, Put (interactive).
[[nodiscard]] const SkillLibrary& defaultLibrary();

struct RobotConfig
{
    std::string name;
    int armCount = 0;
    bool mobile = true;
    std::set<std::string> availableSkills;
    std::string description;

    [[nodiscard]] bool hasSkill(std::string_view skill) const;
    bool operator==(const RobotConfig&) const = default;
};

/// Throws ConfigError when arm/mobility invariants or skill names are violated.
void validateConfig(const RobotConfig& config, const SkillLibrary& library);

[[nodiscard]] RobotConfig humanoidConfig();
[[nodiscard]] RobotConfig singleArmConfig();
[[nodiscard]] RobotConfig quadrupedConfig();
[[nodiscard]] std::vector<RobotConfig> bundledConfigs();

[[nodiscard]] RobotConfig configFromJson(const nlohmann::json& document, const SkillLibrary& library);
[[nodiscard]] nlohmann::json configToJson(const RobotConfig& config);
[[nodiscard]] RobotConfig loadConfigFile(const std::filesystem::path& path, const SkillLibrary& library);

/// Bundled name ("humanoid", "single_arm", "quadruped") or a path to a JSON config file.
[[nodiscard]] RobotConfig resolveConfig(std::string_view nameOrPath,
                                        const SkillLibrary& library,
                                        const std::filesystem::path& baseDir = {});

enum class ViolationKind
{
    SkillUnavailable,
    NoFreeHand,
    NothingHeld,
    AlreadyHeld,
    NotHeld,
};

[[nodiscard]] std::string_view toString(ViolationKind kind) noexcept;

struct LegalityViolation
{
    std::size_t step = 1; // 1-based index into plan.steps
    ViolationKind kind = ViolationKind::SkillUnavailable;
    std::string message;

    bool operator==(const LegalityViolation&) const = default;
};

/// Symbolic hand-occupancy pass over the plan. Hands not free at the start hold unnamed objects.
/// Throws std::invalid_argument when initialFreeHands exceeds the arm count.
[[nodiscard]] std::vector<LegalityViolation> checkLegality(const Plan& plan,
                                                            const RobotConfig& config,
                                                            int initialFreeHands);

/// Same pass starting from known hand contents (one entry per arm).
[[nodiscard]] std::vector<LegalityViolation> checkLegality(const Plan& plan,
                                                            const RobotConfig& config,
                                                            const std::vector<std::optional<std::string>>& hands);

[[nodiscard]] std::string formatViolation(const LegalityViolation& violation);

/// The "Skill Library:" section, listing only skills available to the config.
[[nodiscard]] std::string renderSkillSection(const SkillLibrary& library, const RobotConfig& config);
/// The "Robot Configuration:" section.
[[nodiscard]] std::string renderConfigSection(const RobotConfig& config);
/// Skill section followed by the configuration section.
[[nodiscard]] std::string renderLibraryPrompt(const SkillLibrary& library, const RobotConfig& config);

} // namespace relep
